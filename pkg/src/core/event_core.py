"""
事件结构模块。

定义事件三元组 (α, ρ, Ω)、结果状态（确定/不确定）、T1/T2 时间线语义，
以及按种子复现试验的采样引擎。
"""

from __future__ import annotations

import numbers
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Any, NamedTuple, Optional, Union, overload

import numpy as np

from src.core.interfaces import ISampler
from src.utils.logger import get_logger
from src.utils.rng import TrialStream

logger = get_logger()

Probability = Union[Fraction, float]

SUM_TOLERANCE = 1e-12


class EventCoreError(Exception):
    """事件结构错误异常。"""
    pass


class EmptyOutcomeSpace(EventCoreError):
    """结果空间为空。"""
    pass


class DuplicateLabel(EventCoreError):
    """结果标签重复。"""
    pass


class NegativeProbability(EventCoreError):
    """概率为负。"""
    pass


class ProbabilitySumMismatch(EventCoreError):
    """概率之和不等于 1。"""

    def __init__(self, total: float):
        self.total = total
        super().__init__(f"概率之和为 {total!r}，与 1 的偏差超过 {SUM_TOLERANCE}")


class ZeroTrials(EventCoreError):
    """试验次数为零。"""
    pass


class UnknownLabel(EventCoreError):
    """结果标签不存在。"""
    pass


class InvalidTick(EventCoreError):
    """时间刻度为负。"""
    pass


class OutcomeStatus:
    """结果状态基类：确定 (Determinate) 或不确定 (Indeterminate)，二者互斥。"""

    __slots__ = ()

    @property
    def is_determinate(self) -> bool:
        raise NotImplementedError

    @property
    def probability(self) -> Probability:
        raise NotImplementedError


@dataclass(frozen=True)
class Determinate(OutcomeStatus):
    """确定状态，概率恰为整数 0 或 1。"""

    value: int

    def __post_init__(self) -> None:
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            raise TypeError(f"确定状态必须用整数 0 或 1 表示，实际为 {self.value!r}")
        if self.value not in (0, 1):
            raise ValueError(f"确定状态只能是 0 或 1，实际为 {self.value}")

    @property
    def is_determinate(self) -> bool:
        return True

    @property
    def probability(self) -> Probability:
        return Fraction(self.value)


@dataclass(frozen=True)
class Indeterminate(OutcomeStatus):
    """不确定状态，概率严格位于 (0, 1)。"""

    p: Probability

    def __post_init__(self) -> None:
        if not 0 < self.p < 1:
            raise ValueError(f"不确定状态的概率必须严格位于 (0, 1)，实际为 {self.p}")

    @property
    def is_determinate(self) -> bool:
        return False

    @property
    def probability(self) -> Probability:
        return self.p


def status_for_probability(p: Probability) -> OutcomeStatus:
    """
    根据模型概率给出对应的状态。

    参数:
        p: 模型概率

    返回:
        p 为 0 或 1 时返回 Determinate，否则返回 Indeterminate
    """
    if p == 0:
        return Determinate(0)
    if p == 1:
        return Determinate(1)
    return Indeterminate(p)


@dataclass(frozen=True)
class InitialConditions:
    """初始条件 α：不透明标签加参数表。"""

    label: str
    params: Mapping[str, Any] = field(default_factory=dict)


def _coerce_probability(label: str, value: Any) -> Probability:
    if isinstance(value, bool):
        raise TypeError(f"标签 '{label}' 的概率不能是布尔值")
    if isinstance(value, numbers.Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, numbers.Real):
        return float(value)
    raise TypeError(f"标签 '{label}' 的概率必须是实数，实际为 {type(value).__name__}")


@dataclass(frozen=True)
class EventStructure:
    """
    事件结构 E = (α, ρ, Ω)。

    ρ 是有限标签空间上的分类采样核；labels 与 probabilities 一一对应。
    """

    alpha: InitialConditions
    labels: tuple[str, ...]
    probabilities: tuple[Probability, ...]
    _cdf: np.ndarray = field(init=False, repr=False, compare=False)
    _index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.labels:
            raise EmptyOutcomeSpace("结果空间不能为空")
        if len(self.labels) != len(self.probabilities):
            raise EmptyOutcomeSpace("标签数量与概率数量不一致")
        if len(set(self.labels)) != len(self.labels):
            raise DuplicateLabel(f"结果标签必须互不相同: {self.labels}")

        probs = tuple(_coerce_probability(lb, p) for lb, p in zip(self.labels, self.probabilities))
        for label, p in zip(self.labels, probs):
            if p != p:
                raise ProbabilitySumMismatch(float("nan"))
            if p < 0:
                raise NegativeProbability(f"标签 '{label}' 的概率为负: {p}")

        if all(isinstance(p, Fraction) for p in probs):
            total: Probability = sum(probs, Fraction(0))
        else:
            total = float(np.sum(np.array([float(p) for p in probs], dtype=np.float64)))
        if abs(total - 1) > SUM_TOLERANCE:
            raise ProbabilitySumMismatch(float(total))

        cdf = np.cumsum(np.array([float(p) for p in probs], dtype=np.float64))
        cdf = np.minimum(cdf, 1.0)
        positive = [i for i, p in enumerate(probs) if p > 0]
        cdf[positive[-1]:] = 1.0
        cdf.setflags(write=False)

        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "_cdf", cdf)
        object.__setattr__(self, "_index", {label: i for i, label in enumerate(self.labels)})

    @property
    def omega_space(self) -> tuple[str, ...]:
        return self.labels

    @property
    def rho(self) -> Mapping[str, Probability]:
        """采样核 ρ：标签到概率的只读映射。"""
        return MappingProxyType(dict(zip(self.labels, self.probabilities)))

    @property
    def cdf(self) -> np.ndarray:
        return self._cdf

    @property
    def is_random(self) -> bool:
        """存在概率严格位于 (0, 1) 的标签时为随机事件。"""
        return any(0 < p < 1 for p in self.probabilities)

    def index_of(self, label: str) -> int:
        try:
            return self._index[label]
        except (KeyError, TypeError):
            raise UnknownLabel(f"未知的结果标签: {label!r}") from None

    def probability(self, label: str) -> Probability:
        return self.probabilities[self.index_of(label)]

    def prestatus(self, label: str) -> OutcomeStatus:
        """T1 区间内该标签的状态。"""
        return status_for_probability(self.probability(label))


class InverseCdfSampler(ISampler):
    """
    逆累积分布采样器。

    对每个均匀数 u 用二分查找返回第一个 cdf > u 的下标，概率为 0 的标签不会被选中。
    """

    def draw(self, cdf: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
        codes = np.searchsorted(cdf, uniforms, side="right")
        return np.minimum(codes, len(cdf) - 1).astype(np.int64)


DEFAULT_SAMPLER: ISampler = InverseCdfSampler()


@dataclass(frozen=True)
class TrialRecord:
    """
    单次试验记录。

    t_omega 是结果交付时刻；T1 = [0, t_omega)，T2 = [t_omega, ∞)。
    """

    trial_index: int
    t_omega: int
    realized: str
    status_before: OutcomeStatus
    status_after: OutcomeStatus
    event: EventStructure = field(repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.trial_index < 0:
            raise ValueError(f"试验序号不能为负: {self.trial_index}")
        if self.t_omega < 0:
            raise ValueError(f"t_omega 不能为负: {self.t_omega}")


def record_for(event: EventStructure, trial_index: int, code: int) -> TrialRecord:
    """由结果下标构造试验记录；第 i 次试验在时刻 i + 1 交付结果。"""
    realized = event.labels[code]
    return TrialRecord(
        trial_index=trial_index,
        t_omega=trial_index + 1,
        realized=realized,
        status_before=event.prestatus(realized),
        status_after=Determinate(1),
        event=event,
    )


def make_event(alpha: Mapping[str, Any] | InitialConditions,
               probabilities: Mapping[str, Any]) -> EventStructure:
    """
    构造并验证事件结构。

    参数:
        alpha: 初始条件参数表（可含 "label" 键）或 InitialConditions
        probabilities: 标签到概率的映射

    返回:
        验证后的 EventStructure；某标签概率为 1 时为非随机（必然）事件

    抛出:
        EmptyOutcomeSpace, NegativeProbability, ProbabilitySumMismatch
    """
    if not probabilities:
        raise EmptyOutcomeSpace("结果空间不能为空")
    if isinstance(alpha, InitialConditions):
        conditions = alpha
    else:
        params = dict(alpha)
        conditions = InitialConditions(label=str(params.pop("label", "unnamed")), params=params)

    event = EventStructure(
        alpha=conditions,
        labels=tuple(str(k) for k in probabilities.keys()),
        probabilities=tuple(probabilities.values()),
    )
    if not event.is_random:
        logger.debug(f"事件 '{conditions.label}' 为非随机事件")
    return event


def sample_trial(event: EventStructure, stream: TrialStream, trial_index: int,
                 sampler: Optional[ISampler] = None) -> TrialRecord:
    """
    实现一次试验。

    参数:
        event: 事件结构
        stream: 随机流；结果只由 (seed, trial_index) 决定
        trial_index: 非负试验序号
        sampler: 采样器，默认为逆累积分布采样

    返回:
        TrialRecord，t_omega = trial_index + 1
    """
    if trial_index < 0:
        raise ValueError(f"试验序号不能为负: {trial_index}")
    sampler = sampler or DEFAULT_SAMPLER
    u = np.array([stream.uniform(trial_index)], dtype=np.float64)
    code = int(sampler.draw(event.cdf, u)[0])
    return record_for(event, trial_index, code)


class TrialRecords(Sequence):
    """集体中试验记录的惰性只读序列，按下标构造 TrialRecord。"""

    def __init__(self, event: EventStructure, codes: np.ndarray):
        self._event = event
        self._codes = codes

    def __len__(self) -> int:
        return int(self._codes.shape[0])

    @overload
    def __getitem__(self, index: int) -> TrialRecord: ...

    @overload
    def __getitem__(self, index: slice) -> list[TrialRecord]: ...

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        n = len(self)
        if index < 0:
            index += n
        if not 0 <= index < n:
            raise IndexError(f"试验序号越界: {index}")
        return record_for(self._event, index, int(self._codes[index]))


class Frequency(NamedTuple):
    """相对频率：精确分数与浮点近似。"""

    exact: Fraction
    approx: float


class Collective:
    """
    集体：同一模型的独立同分布试验序列。

    内部只保存结果下标数组；records 按需构造 TrialRecord。
    """

    def __init__(self, model: EventStructure, codes: np.ndarray, seed: int):
        codes = np.asarray(codes, dtype=np.int64).copy()
        if codes.ndim != 1 or codes.shape[0] == 0:
            raise ZeroTrials("集体至少需要一次试验")
        if codes.min() < 0 or codes.max() >= len(model.labels):
            raise UnknownLabel("结果下标超出结果空间")
        codes.setflags(write=False)
        self.model = model
        self.seed = int(seed)
        self._codes = codes
        self._counts: Optional[np.ndarray] = None

    @classmethod
    def from_labels(cls, model: EventStructure, realized: Sequence[str], seed: int = 0) -> Collective:
        """由给定的结果标签序列构造集体（用于注入合成数据）。"""
        return cls(model, np.array([model.index_of(lb) for lb in realized], dtype=np.int64), seed)

    @property
    def codes(self) -> np.ndarray:
        return self._codes

    @property
    def records(self) -> TrialRecords:
        return TrialRecords(self.model, self._codes)

    def __len__(self) -> int:
        return int(self._codes.shape[0])

    def counts(self) -> np.ndarray:
        """各标签的出现次数（与 model.labels 同序）。"""
        if self._counts is None:
            counts = np.bincount(self._codes, minlength=len(self.model.labels))
            counts.setflags(write=False)
            self._counts = counts
        return self._counts

    def count(self, label: str) -> int:
        return int(self.counts()[self.model.index_of(label)])

    def prefix_counts(self, label: str, checkpoints: Sequence[int]) -> list[int]:
        """
        前 n 次试验中该标签的出现次数。

        参数:
            label: 结果标签
            checkpoints: 递增的试验次数列表，每个不超过集体长度

        返回:
            与 checkpoints 对应的计数列表
        """
        code = self.model.index_of(label)
        hits = np.cumsum(self._codes == code)
        out = []
        for n in checkpoints:
            if not 1 <= n <= len(self):
                raise ValueError(f"检查点 {n} 超出集体长度 {len(self)}")
            out.append(int(hits[n - 1]))
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Collective):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.model.labels == other.model.labels
            and self.model.probabilities == other.model.probabilities
            and np.array_equal(self._codes, other._codes)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Collective(n={len(self)}, seed={self.seed}, model={self.model.alpha.label!r})"


def run_collective(event: EventStructure, n: int, seed: int,
                   sampler: Optional[ISampler] = None) -> Collective:
    """
    运行 n 次独立试验。

    每次试验的子流由 (seed, trial_index) 派生，结果与求值顺序无关；
    长度为 m 的集体的前 n 条记录与长度为 n 的集体相同。

    参数:
        event: 事件结构
        n: 试验次数，至少为 1
        seed: 64 位整数种子
        sampler: 采样器，默认为逆累积分布采样

    返回:
        Collective

    抛出:
        ZeroTrials: n < 1
    """
    if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < 1:
        raise ZeroTrials(f"试验次数必须至少为 1，实际为 {n}")
    sampler = sampler or DEFAULT_SAMPLER
    uniforms = TrialStream(seed).uniforms(0, int(n))
    codes = sampler.draw(event.cdf, uniforms)
    logger.debug(f"事件 '{event.alpha.label}' 完成 {n} 次试验 (seed={seed})")
    return Collective(event, codes, seed)


def status_at(record: TrialRecord, label: str, t: int) -> OutcomeStatus:
    """
    查询某条记录在时刻 t 对某标签的状态。

    参数:
        record: 试验记录
        label: 结果标签
        t: 非负时间刻度

    返回:
        t < t_omega 时为模型概率对应的状态；t >= t_omega 时实现的标签为
        Determinate(1)，其余为 Determinate(0)

    抛出:
        UnknownLabel, InvalidTick
    """
    if t < 0:
        raise InvalidTick(f"时间刻度不能为负: {t}")
    event = record.event
    event.index_of(label)
    if t < record.t_omega:
        return event.prestatus(label)
    return Determinate(1) if label == record.realized else Determinate(0)


def frequency(collective: Collective, label: str) -> Frequency:
    """
    计算标签的相对频率。

    参数:
        collective: 非空集体
        label: 结果标签

    返回:
        Frequency(exact=count/n, approx=float)

    抛出:
        UnknownLabel
    """
    count = collective.count(label)
    exact = Fraction(count, len(collective))
    return Frequency(exact=exact, approx=float(exact))


def frequencies(collective: Collective) -> dict[str, Frequency]:
    """所有标签的相对频率，精确值之和为 1。"""
    return {label: frequency(collective, label) for label in collective.model.labels}
