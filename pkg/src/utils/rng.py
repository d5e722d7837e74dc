"""
随机流模块。

基于 SplitMix64 的计数器式随机数生成器。每个 (seed, index) 对应一个独立的
均匀数，可以随机访问，因此试验结果与求值顺序无关。
"""

from __future__ import annotations

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX_MUL_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_MUL_2 = np.uint64(0x94D049BB133111EB)
_SHIFT_30 = np.uint64(30)
_SHIFT_27 = np.uint64(27)
_SHIFT_31 = np.uint64(31)
_SHIFT_11 = np.uint64(11)
_INV_2_53 = 1.0 / float(1 << 53)


def mix64(states: np.ndarray) -> np.ndarray:
    """
    SplitMix64 的输出混合函数（向量化）。

    参数:
        states: uint64 数组

    返回:
        混合后的 uint64 数组
    """
    z = states.astype(np.uint64, copy=True)
    z ^= z >> _SHIFT_30
    z *= _MIX_MUL_1
    z ^= z >> _SHIFT_27
    z *= _MIX_MUL_2
    z ^= z >> _SHIFT_31
    return z


def uniforms_for(seed: int, indices: np.ndarray) -> np.ndarray:
    """
    计算 (seed, index) 对应的 [0, 1) 均匀数。

    参数:
        seed: 64 位种子（超出范围的值按 2^64 取模）
        indices: 非负整数索引数组

    返回:
        float64 数组，形状与 indices 相同
    """
    base = mix64(np.array([seed & MASK64], dtype=np.uint64))[0]
    counters = np.asarray(indices, dtype=np.uint64) + np.uint64(1)
    with np.errstate(over="ignore"):
        states = base + counters * GOLDEN_GAMMA
        bits = mix64(states)
    return (bits >> _SHIFT_11).astype(np.float64) * _INV_2_53


class TrialStream:
    """
    可复现、可拆分的随机流。

    第 i 个均匀数只由 (seed, i) 决定。
    """

    def __init__(self, seed: int):
        """
        初始化随机流。

        参数:
            seed: 64 位整数种子
        """
        self._seed = int(seed) & MASK64

    @property
    def seed(self) -> int:
        return self._seed

    def uniform(self, index: int) -> float:
        """
        获取第 index 个均匀数。

        参数:
            index: 非负整数索引

        返回:
            [0, 1) 区间的浮点数
        """
        if index < 0:
            raise ValueError(f"索引不能为负: {index}")
        return float(uniforms_for(self._seed, np.array([index], dtype=np.uint64))[0])

    def uniforms(self, start: int, stop: int) -> np.ndarray:
        """
        获取索引区间 [start, stop) 的均匀数。

        参数:
            start: 起始索引（包含）
            stop: 结束索引（不包含）

        返回:
            float64 数组
        """
        if start < 0 or stop < start:
            raise ValueError(f"无效的索引区间: [{start}, {stop})")
        return uniforms_for(self._seed, np.arange(start, stop, dtype=np.uint64))

    def child(self, salt: int) -> TrialStream:
        """
        派生一条独立的子流。

        参数:
            salt: 区分子流的整数

        返回:
            新的 TrialStream
        """
        derived = mix64(np.array([(self._seed ^ (int(salt) * 0xD1B54A32D192ED03)) & MASK64],
                                 dtype=np.uint64))
        return TrialStream(int(derived[0]))

    def __repr__(self) -> str:
        return f"TrialStream(seed={self._seed})"
