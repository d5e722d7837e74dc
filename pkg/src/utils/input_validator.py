"""
输入验证模块。

提供命令行与配置输入的验证和 sanitization 功能。
"""

import math
import os
from pathlib import Path
from typing import Any, Iterable, Optional

from src.utils.logger import get_logger

logger = get_logger()


class InputValidationError(Exception):
    """输入验证错误异常。"""
    pass


class InputValidator:
    """
    输入验证器类。

    提供试验次数、种子、输出格式、路径等输入的验证功能。
    """

    OUTPUT_FORMATS = ("csv", "json")
    MAX_SEED_BITS = 64
    MAX_PATH_LENGTH = 1024

    @classmethod
    def validate_count(cls, value: Any, name: str, minimum: int = 0) -> int:
        """
        验证计数类参数（试验次数、光子数、分箱数）。

        参数:
            value: 待验证的值
            name: 参数名称（用于错误信息）
            minimum: 允许的最小值

        返回:
            验证后的整数

        抛出:
            InputValidationError: 类型或范围不合法
        """
        if isinstance(value, bool) or not isinstance(value, int):
            raise InputValidationError(f"{name} 必须是整数，实际为 {type(value).__name__}")
        if value < minimum:
            raise InputValidationError(f"{name} 不能小于 {minimum}，实际为 {value}")
        return value

    @classmethod
    def validate_seed(cls, seed: Any) -> int:
        """
        验证随机种子。

        参数:
            seed: 种子值

        返回:
            验证后的整数种子
        """
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise InputValidationError(f"种子必须是整数，实际为 {type(seed).__name__}")
        if seed < 0 or seed.bit_length() > cls.MAX_SEED_BITS:
            raise InputValidationError(f"种子必须是 64 位无符号整数: {seed}")
        return seed

    @classmethod
    def validate_seeds(cls, seeds: Iterable[Any]) -> tuple[int, ...]:
        """
        验证种子列表（不能为空）。

        参数:
            seeds: 种子序列

        返回:
            种子元组
        """
        validated = tuple(cls.validate_seed(s) for s in seeds)
        if not validated:
            raise InputValidationError("种子列表不能为空")
        return validated

    @classmethod
    def validate_probability(cls, value: Any, name: str = "probability") -> float:
        """
        验证概率值位于 [0, 1]。

        参数:
            value: 概率值
            name: 参数名称

        返回:
            浮点数概率
        """
        try:
            p = float(value)
        except (TypeError, ValueError) as e:
            raise InputValidationError(f"{name} 必须是数值: {value!r}") from e
        if math.isnan(p) or p < 0.0 or p > 1.0:
            raise InputValidationError(f"{name} 必须位于 [0, 1]，实际为 {value}")
        return p

    @classmethod
    def validate_confidence(cls, value: Any) -> float:
        """
        验证置信水平位于开区间 (0, 1)。

        参数:
            value: 置信水平

        返回:
            浮点数置信水平
        """
        level = cls.validate_probability(value, "confidence")
        if level <= 0.0 or level >= 1.0:
            raise InputValidationError(f"置信水平必须位于 (0, 1)，实际为 {value}")
        return level

    @classmethod
    def validate_format(cls, fmt: str) -> str:
        """
        验证输出格式。

        参数:
            fmt: 格式名称

        返回:
            规范化的格式名称
        """
        normalized = (fmt or "").strip().lower()
        if normalized not in cls.OUTPUT_FORMATS:
            raise InputValidationError(
                f"输出格式必须是 {', '.join(cls.OUTPUT_FORMATS)} 之一，实际为 {fmt!r}"
            )
        return normalized

    @classmethod
    def validate_path(cls, path: Optional[str]) -> bool:
        """
        验证路径字符串的长度。

        参数:
            path: 路径字符串

        返回:
            验证通过返回 True，否则抛出 InputValidationError
        """
        if path is None:
            return True
        if len(str(path)) > cls.MAX_PATH_LENGTH:
            raise InputValidationError(f"路径不能超过 {cls.MAX_PATH_LENGTH} 个字符")
        return True

    @classmethod
    def ensure_writable_dir(cls, directory: Path) -> Path:
        """
        确保输出目录存在且可写。

        参数:
            directory: 目录路径

        返回:
            目录的 Path 对象

        抛出:
            OSError: 目录无法创建或不可写
        """
        cls.validate_path(str(directory))
        directory.mkdir(parents=True, exist_ok=True)
        if not os.access(directory, os.W_OK):
            raise PermissionError(f"输出目录不可写: {directory}")
        logger.debug(f"输出目录可写: {directory}")
        return directory

