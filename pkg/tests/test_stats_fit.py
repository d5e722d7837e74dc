import numpy as np
import pytest
from pytest import approx

from src.core.quantum_twoslit import intensity_profile
from src.core.stats_fit import (
    AllBinsPooled,
    EmptyHistogram,
    InvalidCounts,
    InvalidDistribution,
    LengthMismatch,
    TooFewPeaks,
    chi_square_gof,
    find_qualifying_peaks,
    ks_distance,
    peak_spacing,
    wilson_interval,
)


def test_wilson_half_successes():
    lo, hi = wilson_interval(5, 10, 0.95)
    assert lo == approx(0.2366, abs=1e-3)
    assert hi == approx(0.7634, abs=1e-3)


def test_wilson_all_successes():
    lo, hi = wilson_interval(10, 10, 0.95)
    assert hi == 1.0
    assert 0.7 < lo < 0.73


def test_wilson_no_successes():
    lo, hi = wilson_interval(0, 10, 0.95)
    assert lo == 0.0
    assert 0.0 < hi < 0.31


def test_wilson_rejects_bad_input():
    with pytest.raises(InvalidCounts):
        wilson_interval(11, 10)
    with pytest.raises(InvalidCounts):
        wilson_interval(0, 0)
    with pytest.raises(InvalidCounts):
        wilson_interval(5, 10, 1.0)


def test_chi_square_perfect_fit():
    result = chi_square_gof([25, 25, 25, 25], [0.25, 0.25, 0.25, 0.25])
    assert result.statistic == 0.0
    assert result.p_value == approx(1.0)
    assert result.dof == 3
    assert result.merged_bins == 0


def test_chi_square_invariant_to_expected_scaling():
    observed = [30, 20, 25, 25]
    a = chi_square_gof(observed, [1, 1, 1, 1])
    b = chi_square_gof(observed, [0.25, 0.25, 0.25, 0.25])
    assert a.statistic == approx(b.statistic)
    assert a.p_value == approx(b.p_value)


def test_chi_square_pools_sparse_bins():
    observed = [1, 2, 3, 44, 50]
    result = chi_square_gof(observed, [0.01, 0.02, 0.02, 0.45, 0.5])
    assert result.merged_bins == 2
    assert result.dof == 2


def test_chi_square_detects_mismatch():
    result = chi_square_gof([900, 100], [0.5, 0.5])
    assert result.p_value < 1e-6


def test_chi_square_all_pooled():
    with pytest.raises(AllBinsPooled):
        chi_square_gof([1, 1, 1], [1 / 3, 1 / 3, 1 / 3])


def test_chi_square_length_mismatch():
    with pytest.raises(LengthMismatch):
        chi_square_gof([10, 10], [0.2, 0.3, 0.5])


def test_chi_square_invalid_distribution():
    with pytest.raises(InvalidDistribution):
        chi_square_gof([10, 10], [0.0, 0.0])


def test_ks_distance():
    assert ks_distance([10, 10, 10, 10], [1, 1, 1, 1]) == approx(0.0)
    assert ks_distance([40, 0, 0, 0], [0.25, 0.25, 0.25, 0.25]) == approx(0.75)
    with pytest.raises(EmptyHistogram):
        ks_distance([0, 0], [0.5, 0.5])


def test_peak_spacing_on_fringes():
    x = np.arange(1000)
    values = np.cos(np.pi * x / 50.0) ** 2
    assert peak_spacing(values, 1e-5) == approx(50 * 1e-5)


def test_single_bump_has_too_few_peaks():
    x = np.linspace(-1, 1, 501)
    with pytest.raises(TooFewPeaks):
        peak_spacing(np.exp(-x ** 2 / 0.1), 0.004)


def test_low_peaks_do_not_qualify():
    values = np.zeros(200)
    values[50] = 1.0
    values[150] = 0.05
    assert find_qualifying_peaks(values).tolist() == [50]


@pytest.mark.parametrize("fraction", [0.5, 0.1, 0.0])
def test_wilson_width_shrinks_with_n(fraction):
    widths = []
    for n in range(10, 10_001, 10):
        lo, hi = wilson_interval(round(fraction * n), n)
        widths.append(hi - lo)
    assert all(later <= earlier + 1e-12 for earlier, later in zip(widths, widths[1:]))


def test_ks_single_hit_in_first_bin():
    pdf = np.array([0.1, 0.2, 0.4, 0.2, 0.1])
    observed = np.array([1, 0, 0, 0, 0])
    assert ks_distance(observed, pdf) == approx(0.9)


def test_ks_single_hit_on_profile(geometry):
    pdf = intensity_profile(geometry).pdf
    observed = np.zeros(geometry.bins, dtype=np.int64)
    observed[0] = 1
    assert ks_distance(observed, pdf) == approx(1.0 - pdf[0])
