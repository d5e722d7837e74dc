"""
核心模块抽象接口定义。

定义采样器与结果写出器的抽象接口。
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Sequence

import numpy as np


class ISampler(ABC):
    """采样核抽象接口：把均匀数映射为结果空间中的下标。"""

    @abstractmethod
    def draw(self, cdf: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
        """
        按累积分布抽取结果下标。

        参数:
            cdf: 单调不减的累积概率数组，最后一个元素为 1
            uniforms: [0, 1) 区间的均匀数数组

        返回:
            与 uniforms 形状相同的整数下标数组
        """
        pass


class IResultWriter(ABC):
    """结果写出器抽象接口。"""

    @abstractmethod
    def write_json(self, path: Path, data: Any) -> Path:
        """原子地写出 JSON 文件。"""
        pass

    @abstractmethod
    def write_csv(self, path: Path, header: Sequence[str], rows: Any) -> Path:
        """原子地写出 CSV 文件。"""
        pass
