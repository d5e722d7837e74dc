"""
配置管理器模块。

提供几何预设、几何配置 JSON 的加载与保存，以及由命令行参数构造的运行配置。
"""

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from src.core.quantum_twoslit import (
    REFERENCE_CONFIG,
    BeamMode,
    InvalidGeometry,
    SlitGeometry,
    SlitMode,
)
from src.utils.input_validator import InputValidationError, InputValidator
from src.utils.logger import get_logger

logger = get_logger()


class ConfigManagerError(Exception):
    """配置管理错误异常。"""
    pass


class ConfigValidationError(ConfigManagerError):
    """配置验证错误异常。"""
    pass


class ConfigLoadError(ConfigManagerError):
    """配置加载错误异常。"""
    pass


class ConfigSaveError(ConfigManagerError):
    """配置保存错误异常。"""
    pass


def atomic_write_text(file_path: Path, text: str) -> None:
    """
    原子写出文本文件，防止写入中断导致文件损坏。

    参数:
        file_path: 目标文件路径
        text: 文件内容
    """
    temp_path = file_path.with_suffix(file_path.suffix + ".tmp")
    try:
        with open(temp_path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(temp_path, file_path)
    except Exception:
        if temp_path.exists():
            try:
                temp_path.unlink()
            except OSError:
                pass
        raise


def dump_json(data: Any, indent: int = 2) -> str:
    """固定格式的 JSON 文本，相同数据总得到相同字节。"""
    return json.dumps(data, indent=indent, ensure_ascii=False) + "\n"


def _atomic_save_json(file_path: Path, data: Any, indent: int = 2) -> None:
    atomic_write_text(file_path, dump_json(data, indent))


class ConfigManager:
    """
    几何配置管理器。

    负责预设查找、几何配置 JSON 的字段验证、加载与保存。
    """

    PRESETS: dict[str, dict[str, Any]] = {
        "reference": dict(REFERENCE_CONFIG),
    }

    GEOMETRY_FIELDS = {
        "wavelength_nm": (int, float),
        "d_mm": (int, float),
        "a_mm": (int, float),
        "L_m": (int, float),
        "window_mm": (int, float),
        "bins": int,
    }

    def preset_names(self) -> list[str]:
        return sorted(self.PRESETS)

    def get_preset(self, name: str) -> dict[str, Any]:
        """
        获取预设几何配置。

        参数:
            name: 预设名称

        返回:
            配置字典的副本

        抛出:
            ConfigValidationError: 预设不存在
        """
        try:
            return dict(self.PRESETS[name])
        except KeyError:
            raise ConfigValidationError(
                f"未知的预设 '{name}'，可用预设: {', '.join(self.preset_names())}"
            ) from None

    def validate_config(self, config: dict[str, Any]) -> bool:
        """
        验证几何配置字段的存在性与类型。

        参数:
            config: 要验证的配置字典

        返回:
            验证通过返回 True

        抛出:
            ConfigValidationError: 配置验证失败时抛出
        """
        if not isinstance(config, dict):
            raise ConfigValidationError(f"几何配置必须是 JSON 对象，实际为 {type(config).__name__}")
        for name, expected_type in self.GEOMETRY_FIELDS.items():
            if name not in config:
                raise ConfigValidationError(f"缺少必需字段: {name}")
            value = config[name]
            if isinstance(value, bool) or not isinstance(value, expected_type):
                type_name = "number" if isinstance(expected_type, tuple) else expected_type.__name__
                raise ConfigValidationError(
                    f"字段 '{name}' 必须是 {type_name} 类型，实际为 {type(value).__name__}"
                )
        unknown = sorted(set(config) - set(self.GEOMETRY_FIELDS))
        if unknown:
            logger.warning(f"忽略未知的几何字段: {', '.join(unknown)}")
        logger.debug("几何配置验证通过")
        return True

    def load_geometry_config(self, path: Path) -> dict[str, Any]:
        """
        从 JSON 文件加载几何配置。

        参数:
            path: 配置文件路径

        返回:
            验证后的配置字典

        抛出:
            ConfigLoadError: 文件不存在或无法解析
            ConfigValidationError: 字段缺失或类型错误
        """
        try:
            with open(path, "r", encoding="utf-8") as f:
                config = json.load(f)
        except (IOError, OSError, json.JSONDecodeError) as e:
            logger.error(f"加载几何配置失败: {e}")
            raise ConfigLoadError(f"无法加载几何配置 {path}: {e}") from e
        self.validate_config(config)
        logger.debug(f"从文件加载几何配置: {path}")
        return {name: config[name] for name in self.GEOMETRY_FIELDS}

    def save_geometry(self, path: Path, geometry: SlitGeometry) -> Path:
        """
        以配置单位保存几何参数。

        参数:
            path: 目标路径
            geometry: 几何参数

        返回:
            写出的路径

        抛出:
            ConfigSaveError
        """
        try:
            _atomic_save_json(Path(path), geometry.to_config())
        except (IOError, OSError) as e:
            logger.error(f"保存几何配置失败: {e}")
            raise ConfigSaveError(f"无法保存几何配置到 {path}: {e}") from e
        logger.debug(f"几何配置已保存到 {path}")
        return Path(path)

    def resolve_geometry(self, preset: Optional[str] = "reference", config_path: Optional[Path] = None,
                         bins: Optional[int] = None) -> SlitGeometry:
        """
        解析最终使用的几何参数：配置文件优先于预设，--bins 覆盖分箱数。

        参数:
            preset: 预设名称
            config_path: 几何配置文件路径
            bins: 分箱数覆盖值

        返回:
            SlitGeometry

        抛出:
            ConfigLoadError, ConfigValidationError
        """
        if config_path is not None:
            config = self.load_geometry_config(Path(config_path))
        else:
            config = self.get_preset(preset or "reference")
        if bins is not None:
            config["bins"] = bins
        try:
            return SlitGeometry.from_config(config)
        except InvalidGeometry as e:
            raise ConfigValidationError(str(e)) from e


@dataclass(frozen=True)
class RunConfig:
    """
    一次命令运行的全部参数。

    种子列表非空，输出格式属于 {csv, json}，计数参数为非负整数，输出目录在运行开始时可写。
    """

    command: str
    out: Path
    seeds: tuple[int, ...] = (0,)
    fmt: str = "json"
    target: Optional[str] = None
    n: Optional[int] = None
    K: Optional[int] = None
    geometry: Optional[SlitGeometry] = None
    slit_mode: SlitMode = SlitMode.BOTH
    beam: BeamMode = BeamMode.WEAK
    reds: int = 5
    whites: int = 5
    model: str = "urn"
    checks: tuple[str, ...] = ()
    label: Optional[str] = None
    confidence: float = 0.95
    snapshots: tuple[int, ...] = ()
    input_path: Optional[Path] = None

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "seeds", InputValidator.validate_seeds(self.seeds))
            object.__setattr__(self, "fmt", InputValidator.validate_format(self.fmt))
            for name in ("n", "K"):
                value = getattr(self, name)
                if value is not None:
                    InputValidator.validate_count(value, name)
            InputValidator.validate_count(self.reds, "reds")
            InputValidator.validate_count(self.whites, "whites")
            for k in self.snapshots:
                InputValidator.validate_count(k, "snapshots")
            InputValidator.validate_confidence(self.confidence)
            InputValidator.validate_path(str(self.out))
        except InputValidationError as e:
            raise ConfigValidationError(str(e)) from e

    def prepare_output(self) -> Path:
        """
        确保输出目录存在且可写。

        抛出:
            OSError
        """
        return InputValidator.ensure_writable_dir(self.out)

    def seed_suffix(self, seed: int) -> str:
        """多个种子时文件名带 _seed{s} 后缀。"""
        return f"_seed{seed}" if len(self.seeds) > 1 else ""
