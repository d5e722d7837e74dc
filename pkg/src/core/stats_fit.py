"""
统计拟合模块。

提供卡方拟合优度、KS 距离、Wilson 区间与峰间距估计。
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats
from scipy.ndimage import uniform_filter1d
from scipy.signal import find_peaks

from src.utils.logger import get_logger

logger = get_logger()

MIN_EXPECTED_COUNT = 5.0
PEAK_THRESHOLD = 0.10


class StatsFitError(Exception):
    """统计拟合错误异常。"""
    pass


class LengthMismatch(StatsFitError):
    """数组长度不一致。"""
    pass


class AllBinsPooled(StatsFitError):
    """合并后不足两个分组，分布过于集中而无法检验。"""
    pass


class TooFewPeaks(StatsFitError):
    """合格的局部极大值少于两个（无干涉条纹）。"""
    pass


class InvalidCounts(StatsFitError):
    """计数不合法。"""
    pass


class InvalidDistribution(StatsFitError):
    """概率分布不合法（含负值或总和为零）。"""
    pass


class EmptyHistogram(StatsFitError):
    """直方图没有任何计数。"""
    pass


@dataclass(frozen=True)
class GofResult:
    """拟合优度检验结果。"""

    statistic: float
    p_value: float
    dof: int
    merged_bins: int

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "dof": self.dof,
            "merged_bins": self.merged_bins,
        }


def _as_pdf(expected_pdf, length: Optional[int] = None) -> np.ndarray:
    pdf = np.asarray(expected_pdf, dtype=np.float64)
    if pdf.ndim != 1:
        raise InvalidDistribution("概率分布必须是一维数组")
    if length is not None and pdf.shape[0] != length:
        raise LengthMismatch(f"观测数组长度 {length} 与期望分布长度 {pdf.shape[0]} 不一致")
    if np.any(~np.isfinite(pdf)) or np.any(pdf < 0):
        raise InvalidDistribution("概率分布不能含负值或非有限值")
    total = pdf.sum()
    if total <= 0:
        raise InvalidDistribution("概率分布的总和必须为正")
    return pdf / total


def _as_counts(observed) -> np.ndarray:
    counts = np.asarray(observed)
    if counts.ndim != 1:
        raise InvalidCounts("计数必须是一维数组")
    if np.any(counts < 0):
        raise InvalidCounts("计数不能为负")
    return counts.astype(np.float64)


def _pool_bins(expected: np.ndarray, floor: float) -> list[tuple[int, int]]:
    """从左到右合并相邻分箱，直到每组期望计数不小于 floor；尾部余量并入最后一组。"""
    groups: list[tuple[int, int]] = []
    start = 0
    acc = 0.0
    for i, e in enumerate(expected):
        acc += e
        if acc >= floor:
            groups.append((start, i + 1))
            start = i + 1
            acc = 0.0
    if start < len(expected):
        if not groups:
            return []
        last_start, _ = groups.pop()
        groups.append((last_start, len(expected)))
    return groups


def chi_square_gof(observed, expected_pdf, total: Optional[int] = None,
                   min_expected: float = MIN_EXPECTED_COUNT) -> GofResult:
    """
    Pearson 卡方拟合优度检验。

    先合并相邻分箱使每组期望计数不小于 min_expected，再计算
    Σ(O−E)²/E，p 值取自自由度为 (组数 − 1) 的卡方生存函数。
    期望分布在内部归一化，因此对整体缩放不变。

    参数:
        observed: 观测计数数组
        expected_pdf: 期望概率数组
        total: 总计数，默认为 observed 之和
        min_expected: 合并阈值

    返回:
        GofResult

    抛出:
        LengthMismatch, AllBinsPooled, InvalidCounts, InvalidDistribution
    """
    counts = _as_counts(observed)
    pdf = _as_pdf(expected_pdf, counts.shape[0])
    observed_total = counts.sum()
    if total is None:
        total = int(observed_total)
    if total <= 0 or abs(observed_total - total) > 0.5:
        raise InvalidCounts(f"总计数 {total} 与观测之和 {observed_total} 不一致")

    expected = pdf * total
    groups = _pool_bins(expected, min_expected)
    if len(groups) < 2:
        raise AllBinsPooled(f"合并后只剩 {len(groups)} 组，无法进行卡方检验")

    obs_g = np.array([counts[a:b].sum() for a, b in groups])
    exp_g = np.array([expected[a:b].sum() for a, b in groups])
    statistic = float(np.sum((obs_g - exp_g) ** 2 / exp_g))
    dof = len(groups) - 1
    p_value = float(np.clip(stats.chi2.sf(statistic, dof), 0.0, 1.0))
    merged = int(counts.shape[0] - len(groups))
    logger.debug(f"卡方检验: statistic={statistic:.4f}, dof={dof}, p={p_value:.4g}, merged={merged}")
    return GofResult(statistic=statistic, p_value=p_value, dof=dof, merged_bins=merged)


def ks_distance(observed, expected_pdf) -> float:
    """
    经验累积分布与模型累积分布之间的最大距离。

    参数:
        observed: 观测计数数组
        expected_pdf: 期望概率数组

    返回:
        [0, 1] 区间的距离

    抛出:
        LengthMismatch, EmptyHistogram
    """
    counts = _as_counts(observed)
    pdf = _as_pdf(expected_pdf, counts.shape[0])
    total = counts.sum()
    if total <= 0:
        raise EmptyHistogram("观测直方图为空")
    empirical = np.cumsum(counts) / total
    model = np.cumsum(pdf)
    return float(np.clip(np.max(np.abs(empirical - model)), 0.0, 1.0))


def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """
    二项比例的 Wilson 得分区间。

    参数:
        successes: 成功次数，0 <= successes <= n
        n: 试验次数，至少为 1
        confidence: 置信水平，位于 (0, 1)

    返回:
        (lo, hi)，满足 0 <= lo <= hi <= 1；全败时 lo 恰为 0，全胜时 hi 恰为 1

    抛出:
        InvalidCounts
    """
    if n < 1 or successes < 0 or successes > n:
        raise InvalidCounts(f"无效的计数: successes={successes}, n={n}")
    if not 0.0 < confidence < 1.0:
        raise InvalidCounts(f"置信水平必须位于 (0, 1): {confidence}")

    z = float(stats.norm.ppf(0.5 + confidence / 2.0))
    z2 = z * z
    p_hat = successes / n
    denom = 1.0 + z2 / n
    center = (p_hat + z2 / (2.0 * n)) / denom
    half = (z / denom) * np.sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n))
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == n else min(1.0, center + half)
    return float(lo), float(hi)


def find_qualifying_peaks(values, threshold: float = PEAK_THRESHOLD,
                          smooth_bins: int = 1) -> np.ndarray:
    """
    寻找高度与显著度都不低于全局最大值 threshold 倍的局部极大值。

    参数:
        values: 一维数组（概率或计数）
        threshold: 相对全局最大值的阈值
        smooth_bins: 滑动平均窗口宽度（分箱数），1 表示不平滑

    返回:
        峰所在下标的数组
    """
    arr = np.asarray(values, dtype=np.float64)
    if smooth_bins > 1:
        arr = uniform_filter1d(arr, size=int(smooth_bins), mode="nearest")
    peak_max = float(arr.max()) if arr.size else 0.0
    if peak_max <= 0:
        return np.array([], dtype=np.int64)
    level = threshold * peak_max
    peaks, _ = find_peaks(arr, height=level, prominence=level)
    return peaks


def peak_spacing(pdf, bin_width: float, threshold: float = PEAK_THRESHOLD,
                 smooth_bins: int = 1) -> float:
    """
    相邻合格极大值之间的平均间距。

    参数:
        pdf: 概率（或计数）数组
        bin_width: 分箱宽度（米）
        threshold: 峰高阈值，默认为全局最大值的 10%
        smooth_bins: 滑动平均窗口宽度（分箱数）

    返回:
        平均峰间距（米）

    抛出:
        TooFewPeaks: 合格峰少于两个
    """
    if bin_width <= 0:
        raise ValueError(f"分箱宽度必须为正: {bin_width}")
    peaks = find_qualifying_peaks(pdf, threshold, smooth_bins)
    if len(peaks) < 2:
        raise TooFewPeaks(f"只找到 {len(peaks)} 个高于 {threshold:.0%} 的峰")
    spacing = float(np.mean(np.diff(peaks))) * bin_width
    logger.debug(f"找到 {len(peaks)} 个峰，平均间距 {spacing:.6g} m")
    return spacing
