"""
双缝量子模拟模块。

把运动中的量子建模为空间概率分布（波，不确定状态），把探测屏上的光点建模为
单个分箱中的狄拉克状态（粒子，确定状态）。强光束保留连续图样，弱光束逐个
发射小波并在屏上坍缩，累积出离散图样。

|Ψ|² 由远场 Fraunhofer 双缝闭式给出：
    I(x) ∝ cos²(π d x / λL) · sinc²(π a x / λL)
单缝模式只保留 sinc² 包络。
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Mapping, Optional, overload

import numpy as np
from scipy.optimize import curve_fit

from src.core.event_core import (
    DEFAULT_SAMPLER,
    Determinate,
    EventStructure,
    InitialConditions,
    OutcomeStatus,
    TrialRecord,
    make_event,
    record_for,
    status_for_probability,
)
from src.core.interfaces import ISampler
from src.core.stats_fit import ks_distance, peak_spacing
from src.utils.logger import get_logger
from src.utils.rng import TrialStream

logger = get_logger()

NORMALIZATION_TOLERANCE = 1e-9
FAR_FIELD_RATIO = 1e3
MIN_FRINGES_IN_WINDOW = 4


class QuantumTwoSlitError(Exception):
    """双缝模拟错误异常。"""
    pass


class InvalidGeometry(QuantumTwoSlitError):
    """几何参数不合法。"""
    pass


class ZeroPhotons(QuantumTwoSlitError):
    """光子数为零。"""
    pass


class FringeFitError(QuantumTwoSlitError):
    """条纹间距拟合失败。"""
    pass


class SlitMode(str, Enum):
    """缝的开闭模式。"""

    BOTH = "both"
    ONE = "one"
    TWO = "two"


class BeamMode(str, Enum):
    """光束强度模式。"""

    WEAK = "weak"
    INTENSE = "intense"


@dataclass(frozen=True)
class SlitGeometry:
    """
    双缝实验几何参数（长度单位均为米）。

    window 是以 0 为中心的屏幕全宽，被等分为 bins 个分箱。
    """

    wavelength: float
    slit_separation: float
    slit_width: float
    screen_distance: float
    window: float
    bins: int

    def __post_init__(self) -> None:
        lengths = {
            "wavelength": self.wavelength,
            "slit_separation": self.slit_separation,
            "slit_width": self.slit_width,
            "screen_distance": self.screen_distance,
            "window": self.window,
        }
        for name, value in lengths.items():
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise InvalidGeometry(f"{name} 必须是数值，实际为 {value!r}")
            if not np.isfinite(value) or value <= 0:
                raise InvalidGeometry(f"{name} 必须为正，实际为 {value}")
        if isinstance(self.bins, bool) or not isinstance(self.bins, int) or self.bins < 1:
            raise InvalidGeometry(f"bins 必须是正整数，实际为 {self.bins!r}")
        if self.slit_width >= self.slit_separation:
            raise InvalidGeometry(
                f"缝宽 {self.slit_width} 必须小于缝间距 {self.slit_separation}"
            )
        min_window = MIN_FRINGES_IN_WINDOW * self.fringe_spacing_analytic
        if self.window < min_window:
            raise InvalidGeometry(
                f"屏幕宽度 {self.window} 至少需要覆盖 {MIN_FRINGES_IN_WINDOW} 个条纹 ({min_window})"
            )
        if not self.far_field_ok:
            logger.warning(
                f"远场条件不满足: L/d = {self.far_field_ratio:.1f} < {FAR_FIELD_RATIO:.0f}"
            )

    @classmethod
    def from_config(cls, config: Mapping[str, Any]) -> SlitGeometry:
        """
        由配置单位（nm、mm、m）构造几何参数。

        参数:
            config: 含 wavelength_nm、d_mm、a_mm、L_m、window_mm、bins 的字典

        返回:
            SlitGeometry
        """
        try:
            return cls(
                wavelength=float(config["wavelength_nm"]) / 1e9,
                slit_separation=float(config["d_mm"]) / 1e3,
                slit_width=float(config["a_mm"]) / 1e3,
                screen_distance=float(config["L_m"]),
                window=float(config["window_mm"]) / 1e3,
                bins=config["bins"],
            )
        except KeyError as e:
            raise InvalidGeometry(f"几何配置缺少字段: {e.args[0]}") from e
        except (TypeError, ValueError) as e:
            raise InvalidGeometry(f"几何配置字段类型错误: {e}") from e

    def to_config(self) -> dict[str, Any]:
        return {
            "wavelength_nm": self.wavelength * 1e9,
            "d_mm": self.slit_separation * 1e3,
            "a_mm": self.slit_width * 1e3,
            "L_m": self.screen_distance,
            "window_mm": self.window * 1e3,
            "bins": self.bins,
        }

    @classmethod
    def from_si(cls, data: Mapping[str, Any]) -> SlitGeometry:
        """由国际单位制字典构造（histogram.json 中的 geometry 字段）。"""
        try:
            return cls(
                wavelength=float(data["wavelength_m"]),
                slit_separation=float(data["d_m"]),
                slit_width=float(data["a_m"]),
                screen_distance=float(data["L_m"]),
                window=float(data["window_m"]),
                bins=data["bins"],
            )
        except KeyError as e:
            raise InvalidGeometry(f"几何字段缺失: {e.args[0]}") from e
        except (TypeError, ValueError) as e:
            raise InvalidGeometry(f"几何字段类型错误: {e}") from e

    def to_si(self) -> dict[str, Any]:
        return {
            "wavelength_m": self.wavelength,
            "d_m": self.slit_separation,
            "a_m": self.slit_width,
            "L_m": self.screen_distance,
            "window_m": self.window,
            "bins": self.bins,
        }

    def with_bins(self, bins: int) -> SlitGeometry:
        return replace(self, bins=bins)

    @property
    def far_field_ratio(self) -> float:
        return self.screen_distance / self.slit_separation

    @property
    def far_field_ok(self) -> bool:
        return self.far_field_ratio >= FAR_FIELD_RATIO

    @property
    def fringe_spacing_analytic(self) -> float:
        """λL/d。"""
        return self.wavelength * self.screen_distance / self.slit_separation

    @property
    def bin_width(self) -> float:
        return self.window / self.bins

    def bin_edges(self) -> np.ndarray:
        return (np.arange(self.bins + 1, dtype=np.float64) - self.bins / 2.0) * self.bin_width

    def bin_centers(self) -> np.ndarray:
        """分箱中心，关于 0 严格对称。"""
        return (np.arange(self.bins, dtype=np.float64) - (self.bins - 1) / 2.0) * self.bin_width


REFERENCE_CONFIG = {
    "wavelength_nm": 500.0,
    "d_mm": 0.25,
    "a_mm": 0.05,
    "L_m": 1.0,
    "window_mm": 20.0,
    "bins": 1024,
}


def reference_geometry() -> SlitGeometry:
    """验收测试使用的参考几何：λ=500nm, d=0.25mm, a=0.05mm, L=1m, W=20mm, N=1024。"""
    return SlitGeometry.from_config(REFERENCE_CONFIG)


def intensity_at(geometry: SlitGeometry, mode: SlitMode, x: np.ndarray) -> np.ndarray:
    """
    未归一化的远场强度。

    参数:
        geometry: 几何参数
        mode: 缝模式
        x: 屏幕位置（米）

    返回:
        与 x 同形状的强度数组
    """
    scale = geometry.wavelength * geometry.screen_distance
    x = np.asarray(x, dtype=np.float64)
    envelope = np.sinc(geometry.slit_width * x / scale) ** 2
    if SlitMode(mode) is SlitMode.BOTH:
        return np.cos(np.pi * geometry.slit_separation * x / scale) ** 2 * envelope
    return envelope


@dataclass(frozen=True, eq=False)
class WaveProfile:
    """
    屏幕窗口上离散化的 |Ψ|² 空间概率分布。

    所有质量非零的分箱都处于不确定状态，这就是运动中的波。
    """

    geometry: SlitGeometry
    pdf: np.ndarray
    mode: SlitMode

    def __post_init__(self) -> None:
        pdf = np.array(self.pdf, dtype=np.float64)
        if pdf.ndim != 1 or pdf.shape[0] != self.geometry.bins:
            raise InvalidGeometry(
                f"分布长度 {pdf.shape} 与分箱数 {self.geometry.bins} 不一致"
            )
        if np.any(~np.isfinite(pdf)) or np.any(pdf < 0):
            raise InvalidGeometry("分布不能含负值或非有限值")
        if abs(pdf.sum() - 1.0) > NORMALIZATION_TOLERANCE:
            raise InvalidGeometry(f"分布未归一化: 总和为 {pdf.sum()!r}")
        pdf.setflags(write=False)
        object.__setattr__(self, "pdf", pdf)
        object.__setattr__(self, "mode", SlitMode(self.mode))

    def status(self, bin_index: int) -> OutcomeStatus:
        """某分箱的空间概率状态。"""
        return status_for_probability(float(self.pdf[bin_index]))

    def rebin(self, factor: int) -> WaveProfile:
        """
        把相邻 factor 个分箱合并为一个，总质量保持为 1。

        参数:
            factor: 合并因子，必须整除分箱数

        返回:
            新的 WaveProfile
        """
        if factor < 1 or self.geometry.bins % factor != 0:
            raise InvalidGeometry(f"合并因子 {factor} 必须整除分箱数 {self.geometry.bins}")
        merged = self.pdf.reshape(-1, factor).sum(axis=1)
        return WaveProfile(self.geometry.with_bins(self.geometry.bins // factor),
                           merged / merged.sum(), self.mode)

    def with_mode(self, mode: SlitMode) -> WaveProfile:
        return intensity_profile(self.geometry, mode)


def intensity_profile(geometry: SlitGeometry, mode: SlitMode = SlitMode.BOTH) -> WaveProfile:
    """
    在分箱中心求值并归一化的强度分布。

    参数:
        geometry: 几何参数
        mode: 缝模式

    返回:
        WaveProfile

    抛出:
        InvalidGeometry
    """
    raw = intensity_at(geometry, mode, geometry.bin_centers())
    total = raw.sum()
    if total <= 0:
        raise InvalidGeometry("窗口内强度为零")
    return WaveProfile(geometry, raw / total, SlitMode(mode))


@dataclass(frozen=True)
class FringeSpacing:
    """
    条纹间距：解析值 λL/d、干涉项上测得的值，以及原始双缝分布的峰间距。

    raw 保留包络对外侧极大值的内拉，通常略小于 analytic。
    """

    analytic: float
    measured: float
    raw: float


def fringe_spacing(geometry: SlitGeometry) -> FringeSpacing:
    """
    条纹间距及其交叉验证。

    测量值取自干涉项（双缝分布除以单缝包络），去掉包络对外侧极大值的内拉。

    参数:
        geometry: 几何参数

    返回:
        FringeSpacing
    """
    profile = intensity_profile(geometry, SlitMode.BOTH)
    both = profile.pdf
    envelope = profile.with_mode(SlitMode.ONE).pdf
    fringe_term = np.divide(both, envelope, out=np.zeros_like(both), where=envelope > 0)
    return FringeSpacing(
        analytic=geometry.fringe_spacing_analytic,
        measured=peak_spacing(fringe_term, geometry.bin_width),
        raw=peak_spacing(both, geometry.bin_width),
    )


@dataclass(frozen=True)
class ErgodicSource:
    """遍历光源的参数。"""

    name: str = "laser"
    beam: BeamMode = BeamMode.WEAK


def bin_label(bin_index: int) -> str:
    return f"bin{bin_index}"


def free_flight_event(source: ErgodicSource, profile: WaveProfile) -> EventStructure:
    """
    把自由飞行包装为事件：结果空间是屏幕的 N 个分箱，概率即分布。

    参数:
        source: 光源参数
        profile: 归一化的强度分布

    返回:
        EventStructure
    """
    pdf = profile.pdf / profile.pdf.sum()
    return make_event(
        InitialConditions(
            label=f"free_flight:{source.name}",
            params={"source": source, "geometry": profile.geometry, "slit_mode": profile.mode},
        ),
        {bin_label(i): float(p) for i, p in enumerate(pdf)},
    )


def _event_geometry(event: EventStructure) -> SlitGeometry:
    geometry = event.alpha.params.get("geometry")
    if not isinstance(geometry, SlitGeometry):
        raise InvalidGeometry("事件不是由强度分布构造的自由飞行事件")
    return geometry


@dataclass(frozen=True)
class ParticleHit:
    """屏幕上的一个光点：所在分箱概率为 1，其余为 0。"""

    photon_index: int
    bin: int
    x_position: float
    t_omega: int
    event: Optional[EventStructure] = field(default=None, repr=False, compare=False)

    def status(self, bin_index: int) -> OutcomeStatus:
        return Determinate(1) if bin_index == self.bin else Determinate(0)

    @property
    def record(self) -> TrialRecord:
        """对应的试验记录，用于 TIC/TD 审计。"""
        if self.event is None:
            raise QuantumTwoSlitError("光点没有关联的自由飞行事件")
        return record_for(self.event, self.photon_index, self.bin)


def emit_wavelet(event: EventStructure, photon_index: int, stream: TrialStream,
                 sampler: Optional[ISampler] = None) -> ParticleHit:
    """
    发射一个小波并在屏上坍缩。

    参数:
        event: 自由飞行事件
        photon_index: 光子序号
        stream: 随机流
        sampler: 采样器，默认为逆累积分布采样

    返回:
        ParticleHit
    """
    geometry = _event_geometry(event)
    sampler = sampler or DEFAULT_SAMPLER
    u = np.array([stream.uniform(photon_index)], dtype=np.float64)
    code = int(sampler.draw(event.cdf, u)[0])
    return ParticleHit(
        photon_index=photon_index,
        bin=code,
        x_position=float(geometry.bin_centers()[code]),
        t_omega=photon_index + 1,
        event=event,
    )


class PhotonHits(Sequence):
    """弱光束光点的惰性只读序列，按光子序号排列。"""

    def __init__(self, event: EventStructure, bins: np.ndarray, centers: np.ndarray):
        self._event = event
        self._bins = bins
        self._centers = centers

    @property
    def bins(self) -> np.ndarray:
        return self._bins

    def __len__(self) -> int:
        return int(self._bins.shape[0])

    @overload
    def __getitem__(self, index: int) -> ParticleHit: ...

    @overload
    def __getitem__(self, index: slice) -> list[ParticleHit]: ...

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        n = len(self)
        if index < 0:
            index += n
        if not 0 <= index < n:
            raise IndexError(f"光子序号越界: {index}")
        code = int(self._bins[index])
        return ParticleHit(
            photon_index=index,
            bin=code,
            x_position=float(self._centers[code]),
            t_omega=index + 1,
            event=self._event,
        )


@dataclass(frozen=True, eq=False)
class DetectionPattern:
    """
    探测屏上的图样。

    弱光束保存计数直方图（总和为 K）；强光束保存连续分布，histogram 为 None。
    expected 是模型分布。
    """

    geometry: SlitGeometry
    slit_mode: SlitMode
    beam: BeamMode
    K: int
    seed: int
    histogram: Optional[np.ndarray]
    expected: np.ndarray

    @property
    def intensity(self) -> np.ndarray:
        """强光束的连续图样。"""
        return self.expected

    def normalized(self) -> np.ndarray:
        """归一化的探测分布。"""
        if self.histogram is None:
            return self.expected
        return self.histogram / self.K

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DetectionPattern):
            return NotImplemented
        if (self.histogram is None) != (other.histogram is None):
            return False
        return (
            self.geometry == other.geometry
            and self.slit_mode == other.slit_mode
            and self.beam == other.beam
            and self.K == other.K
            and self.seed == other.seed
            and (self.histogram is None or np.array_equal(self.histogram, other.histogram))
            and np.array_equal(self.expected, other.expected)
        )

    __hash__ = None  # type: ignore[assignment]


def _emit_stream(geometry: SlitGeometry, mode: SlitMode, K: int, seed: int,
                 sampler: Optional[ISampler]) -> tuple[WaveProfile, EventStructure, np.ndarray]:
    if isinstance(K, bool) or not isinstance(K, (int, np.integer)) or K < 1:
        raise ZeroPhotons(f"光子数必须至少为 1，实际为 {K}")
    profile = intensity_profile(geometry, mode)
    event = free_flight_event(ErgodicSource(beam=BeamMode.WEAK), profile)
    sampler = sampler or DEFAULT_SAMPLER
    bins = sampler.draw(event.cdf, TrialStream(seed).uniforms(0, int(K)))
    bins.setflags(write=False)
    return profile, event, bins


def run_weak_beam(geometry: SlitGeometry, mode: SlitMode, K: int, seed: int,
                  sampler: Optional[ISampler] = None) -> tuple[DetectionPattern, PhotonHits]:
    """
    弱光束实验：逐个发射 K 个小波，在屏上坍缩并累积直方图。

    每个光子的子流由 (seed, photon_index) 决定。

    参数:
        geometry: 几何参数
        mode: 缝模式
        K: 光子数，至少为 1
        seed: 整数种子
        sampler: 采样器

    返回:
        (DetectionPattern, PhotonHits)

    抛出:
        ZeroPhotons
    """
    profile, event, bins = _emit_stream(geometry, mode, K, seed, sampler)
    histogram = np.bincount(bins, minlength=geometry.bins).astype(np.int64)
    pattern = DetectionPattern(
        geometry=geometry,
        slit_mode=SlitMode(mode),
        beam=BeamMode.WEAK,
        K=int(K),
        seed=int(seed),
        histogram=histogram,
        expected=profile.pdf,
    )
    logger.info(f"弱光束完成: mode={SlitMode(mode).value}, K={K}, seed={seed}")
    return pattern, PhotonHits(event, bins, geometry.bin_centers())


def run_intense_beam(geometry: SlitGeometry, mode: SlitMode) -> DetectionPattern:
    """
    强光束实验：辐射在 T1 与 T2 中都保持不确定状态，探测图样就是连续分布本身。

    参数:
        geometry: 几何参数
        mode: 缝模式

    返回:
        DetectionPattern（histogram 为 None）
    """
    profile = intensity_profile(geometry, mode)
    return DetectionPattern(
        geometry=geometry,
        slit_mode=SlitMode(mode),
        beam=BeamMode.INTENSE,
        K=0,
        seed=0,
        histogram=None,
        expected=profile.pdf,
    )


@dataclass(frozen=True, eq=False)
class ProgressiveSnapshot:
    """渐进图样的一帧。"""

    K: int
    histogram: np.ndarray
    ks_distance: float


def progressive_pattern(geometry: SlitGeometry, mode: SlitMode, k_schedule: Sequence[int],
                        seed: int) -> list[ProgressiveSnapshot]:
    """
    同一光子流在不同 K 下的累积图样。

    第 K 帧由前 K 个光子组成，因此各帧互为前缀。

    参数:
        geometry: 几何参数
        mode: 缝模式
        k_schedule: 严格递增的光子数列表
        seed: 整数种子

    返回:
        ProgressiveSnapshot 列表
    """
    schedule = [int(k) for k in k_schedule]
    if not schedule:
        raise ZeroPhotons("K 序列不能为空")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise QuantumTwoSlitError(f"K 序列必须严格递增: {schedule}")
    if schedule[0] < 1:
        raise ZeroPhotons(f"光子数必须至少为 1，实际为 {schedule[0]}")
    profile, _, bins = _emit_stream(geometry, mode, schedule[-1], seed, None)
    frames = []
    for k in schedule:
        histogram = np.bincount(bins[:k], minlength=geometry.bins).astype(np.int64)
        frames.append(ProgressiveSnapshot(K=k, histogram=histogram,
                                          ks_distance=ks_distance(histogram, profile.pdf)))
    return frames


def pattern_peak_spacing(pattern: DetectionPattern, smooth_width: float = 4e-4) -> float:
    """
    图样上的平均峰间距。

    计数直方图先做宽度为 smooth_width（米）的滑动平均。

    参数:
        pattern: 探测图样
        smooth_width: 平滑宽度（米）

    返回:
        平均峰间距（米）

    抛出:
        TooFewPeaks: 无干涉条纹
    """
    bin_width = pattern.geometry.bin_width
    if pattern.histogram is None:
        return peak_spacing(pattern.expected, bin_width)
    smooth_bins = max(1, int(round(smooth_width / bin_width)))
    return peak_spacing(pattern.histogram, bin_width, smooth_bins=smooth_bins)


def fit_fringe_spacing(pattern: DetectionPattern) -> float:
    """
    在固定单缝包络下用最小二乘拟合弱光束直方图的条纹周期。

    参数:
        pattern: 双缝弱光束图样

    返回:
        拟合的条纹间距（米）

    抛出:
        FringeFitError
    """
    if pattern.histogram is None or pattern.slit_mode is not SlitMode.BOTH:
        raise FringeFitError("条纹拟合需要双缝弱光束图样")
    geometry = pattern.geometry
    x_mm = geometry.bin_centers() * 1e3
    envelope = intensity_at(geometry, SlitMode.ONE, geometry.bin_centers())
    counts = pattern.histogram.astype(np.float64)

    def model(x: np.ndarray, amplitude: float, spacing_mm: float) -> np.ndarray:
        return amplitude * np.cos(np.pi * x / spacing_mm) ** 2 * envelope

    p0 = [counts.max() / envelope.max(), geometry.fringe_spacing_analytic * 1e3]
    sigma = np.sqrt(np.maximum(counts, 1.0))
    try:
        params, _ = curve_fit(model, x_mm, counts, p0=p0, sigma=sigma)
    except (RuntimeError, ValueError) as e:
        raise FringeFitError(f"条纹拟合失败: {e}") from e
    spacing = abs(float(params[1])) / 1e3
    logger.debug(f"拟合条纹间距 {spacing:.6g} m (解析值 {geometry.fringe_spacing_analytic:.6g} m)")
    return spacing
