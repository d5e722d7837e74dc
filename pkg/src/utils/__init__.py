"""
Probstruct 工具模块。

提供日志记录、输入验证与可复现随机流等工具功能。
"""

from .logger import get_logger
from .input_validator import InputValidator, InputValidationError
from .rng import TrialStream

__all__ = [
    "get_logger",
    "InputValidator",
    "InputValidationError",
    "TrialStream",
]
