"""
定理检查模块。

把五条结构定理（TSN、TLN、TIC、TC、TD）与间接检验推论实现为带种子的
通过/失败检查，每个检查产出一份 CheckReport。检查对 (模型, 种子) 是纯函数。
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from src.core.event_core import (
    Collective,
    Determinate,
    EventStructure,
    TrialRecord,
    run_collective,
    status_at,
)
from src.core.interfaces import ISampler
from src.core.quantum_twoslit import DetectionPattern
from src.core.stats_fit import wilson_interval
from src.utils.logger import get_logger
from src.utils.rng import TrialStream

logger = get_logger()

TSN = "TSN"
TLN = "TLN"
TIC = "TIC"
TC = "TC"
TD = "TD"
INDIRECT = "INDIRECT"
BAYES = "BAYES"
ALL_CHECKS = (TSN, TLN, TIC, TC, TD, INDIRECT, BAYES)

TLN_MIN_TRIALS = 10_000
TLN_SIGMAS = 4.0
# TSN 的单次试验取自独立子流，不与其他检查的集体共享试验
TSN_STREAM_SALT = 0x54534E
TC_MIN_TRIALS = 100
INDIRECT_MIN_TRIALS = 30
TIC_SMALL_N = 100
TC_PATTERN_MIN_EXPECTED = 10.0

OUTCOME_PASS = "pass"
OUTCOME_PREDICATE_FALSE = "predicate_false"


class TheoremSuiteError(Exception):
    """定理检查错误异常。"""
    pass


class NonRandomEvent(TheoremSuiteError):
    """事件不是随机事件（没有概率严格位于 (0, 1) 的标签）。"""
    pass


class DegenerateLabel(TheoremSuiteError):
    """标签概率为 0 或 1。"""
    pass


class TooFewTrials(TheoremSuiteError):
    """试验次数不足。"""
    pass


class InvalidSchedule(TheoremSuiteError):
    """检查点序列不合法。"""
    pass


class InvalidPrior(TheoremSuiteError):
    """Beta 先验参数或计数不合法。"""
    pass


class InvalidConfidence(TheoremSuiteError):
    """置信水平不在 (0, 1) 内。"""
    pass


@dataclass(frozen=True)
class CheckReport:
    """
    一次检查的结果。

    passed 当且仅当该检查的谓词对 (statistic, threshold) 成立；n 与 seed 总被记录。
    """

    check_name: str
    passed: bool
    statistic: float
    threshold: float
    n: int
    seed: int
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.check_name,
            "passed": self.passed,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "n": self.n,
            "seed": self.seed,
            "details": dict(self.details),
        }


@dataclass(frozen=True)
class ConvergenceTrace:
    """TLN 的收敛轨迹：每个检查点的 (n, |F − p|) 与最终的容差。"""

    checkpoints: tuple[tuple[int, float], ...]
    final_bound: float


@dataclass(frozen=True)
class AuditResult:
    """对一组试验记录的状态审计结果。"""

    records: int
    violations: int
    first_violation: Optional[int] = None

    @property
    def clean(self) -> bool:
        return self.violations == 0


def _report(name: str, passed: bool, statistic: float, threshold: float, n: int, seed: int,
            details: dict[str, Any]) -> CheckReport:
    details = dict(details)
    details["outcome"] = OUTCOME_PASS if passed else OUTCOME_PREDICATE_FALSE
    if passed:
        logger.info(f"{name} 通过: statistic={statistic:.6g}, threshold={threshold:.6g}, n={n}, seed={seed}")
    else:
        logger.warning(f"{name} 谓词不成立: statistic={statistic:.6g}, threshold={threshold:.6g}, n={n}, seed={seed}")
    return CheckReport(name, bool(passed), float(statistic), float(threshold), int(n), int(seed), details)


def _require_random(event: EventStructure, check: str) -> None:
    if not event.is_random:
        raise NonRandomEvent(f"{check} 需要随机事件，'{event.alpha.label}' 是必然事件")


def _random_probability(event: EventStructure, label: str) -> float:
    p = event.probability(label)
    if not 0 < p < 1:
        raise DegenerateLabel(f"标签 '{label}' 的概率为 {p}，不是随机结果")
    return float(p)


def first_random_label(event: EventStructure) -> str:
    """概率严格位于 (0, 1) 的第一个标签。"""
    for label, p in zip(event.labels, event.probabilities):
        if 0 < p < 1:
            return label
    raise NonRandomEvent(f"事件 '{event.alpha.label}' 没有随机结果")


def sigma_bound(p: float, n: int, sigmas: float = TLN_SIGMAS) -> float:
    """二项频率的 k·σ 容差 k·sqrt(p(1 − p)/n)。"""
    return sigmas * math.sqrt(p * (1.0 - p) / n)


def check_tsn(event: EventStructure, seed: int, sampler: Optional[ISampler] = None) -> CheckReport:
    """
    单次试验定理：一次试验的相对频率不等于概率。

    只运行一次试验，试验取自由 seed 派生的独立子流；当每个标签的频率都属于 {0, 1}，且每个随机标签的频率都不等于
    其概率时通过。统计量是随机标签上 |F − p| 的最小值。

    参数:
        event: 随机事件
        seed: 整数种子
        sampler: 采样器

    返回:
        CheckReport

    抛出:
        NonRandomEvent
    """
    _require_random(event, TSN)
    trial_seed = TrialStream(seed).child(TSN_STREAM_SALT).seed
    collective = run_collective(event, 1, trial_seed, sampler)
    counts = collective.counts()
    integral = all(int(c) in (0, 1) for c in counts)
    gaps = [abs(float(c) - float(p)) for c, p in zip(counts, event.probabilities) if 0 < p < 1]
    statistic = min(gaps)
    passed = integral and statistic > 0
    return _report(TSN, passed, statistic, 0.0, 1, seed, {
        "realized": collective.records[0].realized,
        "trial_seed": trial_seed,
        "frequencies_integral": integral,
    })


def tln_from_collective(collective: Collective, label: str,
                        n_schedule: Optional[Sequence[int]] = None) -> tuple[CheckReport, ConvergenceTrace]:
    """
    在给定集体上检查 TLN，用于注入合成数据。

    参数:
        collective: 集体，模型概率取自 collective.model
        label: 随机标签
        n_schedule: 检查点序列，默认只有集体长度

    返回:
        (CheckReport, ConvergenceTrace)

    抛出:
        DegenerateLabel, InvalidSchedule
    """
    p = _random_probability(collective.model, label)
    schedule = _validate_schedule(list(n_schedule) if n_schedule is not None else [len(collective)])
    if schedule[-1] > len(collective):
        raise InvalidSchedule(f"最后的检查点 {schedule[-1]} 超出集体长度 {len(collective)}")

    counts = collective.prefix_counts(label, schedule)
    checkpoints = tuple((n, min(1.0, abs(c / n - p))) for n, c in zip(schedule, counts))
    final_n, final_error = checkpoints[-1]
    bound = sigma_bound(p, final_n)
    trace = ConvergenceTrace(checkpoints=checkpoints, final_bound=bound)
    report = _report(TLN, final_error <= bound, final_error, bound, final_n, collective.seed, {
        "label": label,
        "model_p": p,
        "frequency": counts[-1] / final_n,
        "checkpoints": [[n, e] for n, e in checkpoints],
    })
    return report, trace


def _validate_schedule(schedule: Sequence[int]) -> list[int]:
    if not schedule:
        raise InvalidSchedule("检查点序列不能为空")
    if any(isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1 for n in schedule):
        raise InvalidSchedule(f"检查点必须是正整数: {list(schedule)}")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise InvalidSchedule(f"检查点必须严格递增: {list(schedule)}")
    if schedule[-1] < TLN_MIN_TRIALS:
        raise InvalidSchedule(f"最后的检查点必须至少为 {TLN_MIN_TRIALS}，实际为 {schedule[-1]}")
    return [int(n) for n in schedule]


def check_tln(event: EventStructure, label: str, n_schedule: Sequence[int], seed: int,
              sampler: Optional[ISampler] = None) -> tuple[CheckReport, ConvergenceTrace]:
    """
    长期定理：相对频率随试验次数增加而趋近概率。

    只运行一次最长的集体，各检查点取其前缀；在最后的 n 上
    |F − p| <= 4·sqrt(p(1 − p)/n) 时通过。

    参数:
        event: 事件
        label: 随机标签
        n_schedule: 严格递增的检查点，最后一个不小于 10⁴
        seed: 整数种子
        sampler: 采样器

    返回:
        (CheckReport, ConvergenceTrace)

    抛出:
        DegenerateLabel, InvalidSchedule
    """
    _random_probability(event, label)
    schedule = _validate_schedule(list(n_schedule))
    collective = run_collective(event, schedule[-1], seed, sampler)
    return tln_from_collective(collective, label, schedule)


def audit_tic(records: Iterable[TrialRecord]) -> AuditResult:
    """
    审计 T1 内的不确定状态。

    对每条记录，在时刻 0、中点与 t_omega − 1 检查实现的标签，另外检查事件中每个标签
    的结果前状态；任一状态为确定状态即记一次违例。

    参数:
        records: 试验记录序列

    返回:
        AuditResult
    """
    degenerate_by_event: dict[int, int] = {}
    total = violations = 0
    first: Optional[int] = None
    for record in records:
        total += 1
        event = record.event
        key = id(event)
        if key not in degenerate_by_event:
            degenerate_by_event[key] = sum(
                1 for label in event.labels if event.prestatus(label).is_determinate
            )
        bad = degenerate_by_event[key]
        if record.status_before.is_determinate:
            bad += 1
        last = record.t_omega - 1
        for t in sorted({0, last // 2, last}):
            if status_at(record, record.realized, t).is_determinate:
                bad += 1
        if bad:
            violations += bad
            if first is None:
                first = record.trial_index
    return AuditResult(records=total, violations=violations, first_violation=first)


def _witness_label(record: TrialRecord) -> Optional[str]:
    labels = record.event.labels
    if len(labels) < 2:
        return None
    i = record.event.index_of(record.realized)
    return labels[(i + 1) % len(labels)]


def audit_td(records: Iterable[TrialRecord]) -> AuditResult:
    """
    审计 t_omega 处的状态切换。

    t_omega 时实现的标签必须为 Determinate(1)，其他标签为 Determinate(0)；
    t_omega − 1 时实现的标签仍为不确定状态。非实现标签的状态只取决于记录的实现
    标签，超过 64 个标签时每条记录只检查相邻的一个标签。

    参数:
        records: 试验记录序列

    返回:
        AuditResult
    """
    total = violations = 0
    first: Optional[int] = None
    for record in records:
        total += 1
        t = record.t_omega
        bad = 0
        if status_at(record, record.realized, t) != Determinate(1):
            bad += 1
        if t < 1 or status_at(record, record.realized, t - 1).is_determinate:
            bad += 1
        labels = record.event.labels
        if len(labels) <= 64:
            others = [lb for lb in labels if lb != record.realized]
        else:
            witness = _witness_label(record)
            others = [witness] if witness is not None else []
        for label in others:
            if status_at(record, label, t) != Determinate(0):
                bad += 1
        if bad:
            violations += bad
            if first is None:
                first = record.trial_index
    return AuditResult(records=total, violations=violations, first_violation=first)


def check_tic(event: EventStructure, n: int, seed: int,
              sampler: Optional[ISampler] = None) -> CheckReport:
    """
    不确定性定理：T1 内结果随机出现，与 n 的取值无关。

    在 n ∈ {1, min(100, n), n} 三个规模上审计全部记录。

    参数:
        event: 随机事件
        n: 最大试验次数
        seed: 整数种子
        sampler: 采样器

    返回:
        CheckReport

    抛出:
        NonRandomEvent
    """
    _require_random(event, TIC)
    sizes = sorted({1, min(TIC_SMALL_N, n), n})
    violations = 0
    audited = 0
    for size in sizes:
        audit = audit_tic(run_collective(event, size, seed, sampler).records)
        violations += audit.violations
        audited += audit.records
    return _report(TIC, violations == 0, violations, 0.0, n, seed, {
        "sizes": sizes,
        "records_audited": audited,
        "violations": violations,
    })


def check_td(event: EventStructure, n: int, seed: int,
             sampler: Optional[ISampler] = None) -> CheckReport:
    """
    确定性定理：结果在 t_omega 时由不确定切换为确定。

    参数:
        event: 随机事件
        n: 试验次数
        seed: 整数种子
        sampler: 采样器

    返回:
        CheckReport

    抛出:
        NonRandomEvent
    """
    _require_random(event, TD)
    audit = audit_td(run_collective(event, n, seed, sampler).records)
    return _report(TD, audit.clean, audit.violations, 0.0, n, seed, {
        "records_audited": audit.records,
        "violations": audit.violations,
        "first_violation": audit.first_violation,
    })


def check_tc(event: EventStructure, label: str, n: int, seed: int,
             sampler: Optional[ISampler] = None) -> CheckReport:
    """
    连续性定理：全部试验完成后，集体层面的频率仍严格位于 (0, 1)。

    统计量为 min(F, 1 − F)。有限 n 下谓词可能合理地不成立，
    details 中给出该情形的精确概率 p^n + (1 − p)^n。

    参数:
        event: 事件
        label: 随机标签
        n: 试验次数，至少为 100
        seed: 整数种子
        sampler: 采样器

    返回:
        CheckReport

    抛出:
        DegenerateLabel, TooFewTrials
    """
    p = _random_probability(event, label)
    if n < TC_MIN_TRIALS:
        raise TooFewTrials(f"TC 需要至少 {TC_MIN_TRIALS} 次试验，实际为 {n}")
    collective = run_collective(event, n, seed, sampler)
    count = collective.count(label)
    freq = count / n
    exact_p = event.probability(label)
    if isinstance(exact_p, Fraction):
        degenerate = float(exact_p ** n + (1 - exact_p) ** n)
    else:
        degenerate = float(p ** n + (1.0 - p) ** n)
    return _report(TC, 0 < count < n, min(freq, 1.0 - freq), 0.0, n, seed, {
        "label": label,
        "count": count,
        "frequency": freq,
        "degenerate_probability": degenerate,
        "finite_n": True,
    })


def check_tc_pattern(pattern: DetectionPattern,
                     min_expected: float = TC_PATTERN_MIN_EXPECTED) -> CheckReport:
    """
    弱光束图样上的 TC：期望计数不小于 min_expected 的每个分箱，频率都严格位于 (0, 1)。

    参数:
        pattern: 弱光束图样
        min_expected: 参与检查的最小期望计数

    返回:
        CheckReport

    抛出:
        TooFewTrials: 图样没有离散光点
    """
    if pattern.histogram is None or pattern.K < 1:
        raise TooFewTrials("强光束图样没有离散光点")
    expected = pattern.expected / pattern.expected.sum() * pattern.K
    eligible = expected >= min_expected
    if not np.any(eligible):
        raise TooFewTrials(f"没有期望计数不小于 {min_expected} 的分箱")
    freq = pattern.histogram[eligible] / pattern.K
    statistic = float(np.min(np.minimum(freq, 1.0 - freq)))
    inside = bool(np.all((freq > 0) & (freq < 1)))
    return _report(TC, inside, statistic, 0.0, pattern.K, pattern.seed, {
        "eligible_bins": int(eligible.sum()),
        "zero_bins": int(np.sum(pattern.histogram[eligible] == 0)),
        "min_expected": min_expected,
    })


def indirect_estimate(event: EventStructure, label: str, n: int, confidence: float, seed: int,
                      sampler: Optional[ISampler] = None) -> tuple[tuple[float, float], CheckReport]:
    """
    间接检验：由集体计数给出 p 的 Wilson 区间。

    模型概率落在区间内时报告通过；按种子而言，这以约等于置信水平的比例发生。

    参数:
        event: 事件
        label: 结果标签
        n: 试验次数，至少为 30
        confidence: 置信水平，位于 (0, 1)
        seed: 整数种子
        sampler: 采样器

    返回:
        ((lo, hi), CheckReport)

    抛出:
        TooFewTrials, InvalidConfidence
    """
    if n < INDIRECT_MIN_TRIALS:
        raise TooFewTrials(f"间接检验需要至少 {INDIRECT_MIN_TRIALS} 次试验，实际为 {n}")
    if not 0.0 < confidence < 1.0:
        raise InvalidConfidence(f"置信水平必须位于 (0, 1): {confidence}")
    p = float(event.probability(label))
    collective = run_collective(event, n, seed, sampler)
    successes = collective.count(label)
    lo, hi = wilson_interval(successes, n, confidence)
    report = _report(INDIRECT, lo <= p <= hi, successes / n, confidence, n, seed, {
        "label": label,
        "model_p": p,
        "successes": successes,
        "lo": lo,
        "hi": hi,
    })
    return (lo, hi), report


@dataclass(frozen=True)
class BetaParams:
    """Beta 分布参数。"""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.b > 0) or not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise InvalidPrior(f"Beta 参数必须为正: a={self.a}, b={self.b}")

    @property
    def mean(self) -> float:
        return self.a / (self.a + self.b)

    @property
    def variance(self) -> float:
        total = self.a + self.b
        return self.a * self.b / (total * total * (total + 1.0))


def bayesian_update(prior: BetaParams, successes: int, failures: int) -> BetaParams:
    """
    Beta-二项共轭更新。

    参数:
        prior: 先验 Beta(a, b)
        successes: 成功次数
        failures: 失败次数

    返回:
        后验 Beta(a + successes, b + failures)

    抛出:
        InvalidPrior
    """
    if successes < 0 or failures < 0:
        raise InvalidPrior(f"计数不能为负: successes={successes}, failures={failures}")
    return BetaParams(prior.a + successes, prior.b + failures)


def check_bayes(event: EventStructure, label: str, n: int, seed: int,
                sampler: Optional[ISampler] = None) -> CheckReport:
    """
    用 Beta(1, 1) 先验与集体计数更新信念，后验均值落在 p 的 4σ 容差内时通过。

    抛出:
        DegenerateLabel, TooFewTrials
    """
    p = _random_probability(event, label)
    if n < INDIRECT_MIN_TRIALS:
        raise TooFewTrials(f"BAYES 需要至少 {INDIRECT_MIN_TRIALS} 次试验，实际为 {n}")
    collective = run_collective(event, n, seed, sampler)
    successes = collective.count(label)
    posterior = bayesian_update(BetaParams(1.0, 1.0), successes, n - successes)
    error = abs(posterior.mean - p)
    bound = sigma_bound(p, n)
    return _report(BAYES, error <= bound, error, bound, n, seed, {
        "label": label,
        "model_p": p,
        "posterior_a": posterior.a,
        "posterior_b": posterior.b,
        "posterior_mean": posterior.mean,
        "posterior_sd": math.sqrt(posterior.variance),
    })


@dataclass(frozen=True)
class SuiteSettings:
    """verify 使用的默认规模。"""

    tln_schedule: tuple[int, ...] = (100, 10_000, 1_000_000)
    tic_n: int = 10_000
    td_n: int = 10_000
    tc_n: int = 1_000
    indirect_n: int = 10_000
    bayes_n: int = 10_000
    confidence: float = 0.95

    @classmethod
    def with_trials(cls, n: int, confidence: float = 0.95) -> SuiteSettings:
        """所有检查都使用 n 次试验；TLN 的最后一个检查点不低于 10⁴。"""
        final = max(n, TLN_MIN_TRIALS)
        schedule = tuple(sorted({k for k in (100, TLN_MIN_TRIALS, final) if k <= final}))
        return cls(tln_schedule=schedule, tic_n=n, td_n=n, tc_n=n, indirect_n=n, bayes_n=n,
                   confidence=confidence)


def run_suite(event: EventStructure, seed: int, checks: Sequence[str] = ALL_CHECKS,
              label: Optional[str] = None, settings: Optional[SuiteSettings] = None,
              sampler: Optional[ISampler] = None) -> list[CheckReport]:
    """
    依次运行所选检查。

    参数:
        event: 事件
        seed: 整数种子
        checks: 检查名称序列
        label: 按标签检查使用的标签，默认为第一个随机标签
        settings: 规模设置
        sampler: 采样器

    返回:
        CheckReport 列表，顺序与 checks 相同

    抛出:
        TheoremSuiteError: 检查名称未知或前置条件不满足
    """
    settings = settings or SuiteSettings()
    unknown = [c for c in checks if c not in ALL_CHECKS]
    if unknown:
        raise TheoremSuiteError(f"未知的检查: {', '.join(unknown)}")
    if label is None:
        label = first_random_label(event)
    else:
        event.index_of(label)

    reports: list[CheckReport] = []
    for name in checks:
        if name == TSN:
            reports.append(check_tsn(event, seed, sampler))
        elif name == TLN:
            reports.append(check_tln(event, label, settings.tln_schedule, seed, sampler)[0])
        elif name == TIC:
            reports.append(check_tic(event, settings.tic_n, seed, sampler))
        elif name == TC:
            reports.append(check_tc(event, label, settings.tc_n, seed, sampler))
        elif name == TD:
            reports.append(check_td(event, settings.td_n, seed, sampler))
        elif name == INDIRECT:
            reports.append(indirect_estimate(event, label, settings.indirect_n,
                                             settings.confidence, seed, sampler)[1])
        elif name == BAYES:
            reports.append(check_bayes(event, label, settings.bayes_n, seed, sampler))
    return reports
