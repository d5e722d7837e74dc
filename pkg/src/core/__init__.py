"""
Probstruct 核心模块。

提供事件结构、定理检查、经典模型、双缝模拟、统计拟合、配置管理与结果写出功能。
"""

from .interfaces import ISampler, IResultWriter
from .event_core import (
    EventCoreError, EmptyOutcomeSpace, DuplicateLabel, NegativeProbability, ProbabilitySumMismatch,
    ZeroTrials, UnknownLabel, InvalidTick,
    Determinate, Indeterminate, EventStructure, TrialRecord, Collective,
    make_event, sample_trial, run_collective, status_at, frequency, frequencies,
)
from .stats_fit import (
    StatsFitError, LengthMismatch, AllBinsPooled, TooFewPeaks, GofResult,
    chi_square_gof, ks_distance, wilson_interval, peak_spacing,
)
from .classical_models import ClassicalModelError, EmptyUrn, AngleOutOfRange, urn_event, roulette_event, roulette_cell, spin
from .quantum_twoslit import (
    QuantumTwoSlitError, InvalidGeometry, ZeroPhotons, SlitMode, BeamMode, SlitGeometry,
    WaveProfile, DetectionPattern, ParticleHit, intensity_profile, fringe_spacing,
    free_flight_event, emit_wavelet, run_weak_beam, run_intense_beam,
)
from .theorem_suite import (
    TheoremSuiteError, NonRandomEvent, DegenerateLabel, TooFewTrials, CheckReport, ConvergenceTrace,
    check_tsn, check_tln, check_tic, check_tc, check_td, indirect_estimate, bayesian_update,
)
from .config_manager import ConfigManager, RunConfig, ConfigValidationError, ConfigLoadError, ConfigSaveError
from .result_writer import ResultWriter, PatternFormatError

__all__ = [
    "ISampler", "IResultWriter",
    "EventCoreError", "EmptyOutcomeSpace", "DuplicateLabel", "NegativeProbability", "ProbabilitySumMismatch",
    "ZeroTrials", "UnknownLabel", "InvalidTick",
    "Determinate", "Indeterminate", "EventStructure", "TrialRecord", "Collective",
    "make_event", "sample_trial", "run_collective", "status_at", "frequency", "frequencies",
    "StatsFitError", "LengthMismatch", "AllBinsPooled", "TooFewPeaks", "GofResult",
    "chi_square_gof", "ks_distance", "wilson_interval", "peak_spacing",
    "ClassicalModelError", "EmptyUrn", "AngleOutOfRange", "urn_event", "roulette_event", "roulette_cell", "spin",
    "QuantumTwoSlitError", "InvalidGeometry", "ZeroPhotons", "SlitMode", "BeamMode", "SlitGeometry",
    "WaveProfile", "DetectionPattern", "ParticleHit", "intensity_profile", "fringe_spacing",
    "free_flight_event", "emit_wavelet", "run_weak_beam", "run_intense_beam",
    "TheoremSuiteError", "NonRandomEvent", "DegenerateLabel", "TooFewTrials", "CheckReport", "ConvergenceTrace",
    "check_tsn", "check_tln", "check_tic", "check_tc", "check_td", "indirect_estimate", "bayesian_update",
    "ConfigManager", "RunConfig", "ConfigValidationError", "ConfigLoadError", "ConfigSaveError",
    "ResultWriter", "PatternFormatError",
]
