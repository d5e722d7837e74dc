import numpy as np
import pytest
from pytest import approx

from src.core.event_core import Determinate
from src.core.quantum_twoslit import (
    BeamMode,
    ErgodicSource,
    FringeFitError,
    InvalidGeometry,
    SlitGeometry,
    SlitMode,
    ZeroPhotons,
    emit_wavelet,
    fit_fringe_spacing,
    free_flight_event,
    fringe_spacing,
    intensity_profile,
    pattern_peak_spacing,
    progressive_pattern,
    run_intense_beam,
    run_weak_beam,
)
from src.core.stats_fit import TooFewPeaks, chi_square_gof
from src.core.theorem_suite import audit_td, audit_tic
from src.utils.rng import TrialStream


def test_reference_geometry_units(geometry):
    assert geometry.wavelength == approx(500e-9)
    assert geometry.fringe_spacing_analytic == approx(2e-3)
    assert geometry.bin_width == approx(20e-3 / 1024)
    assert geometry.far_field_ok


def test_bin_centers_are_symmetric(geometry):
    centers = geometry.bin_centers()
    assert np.array_equal(centers, -centers[::-1])
    edges = geometry.bin_edges()
    assert edges[0] == approx(-10e-3)
    assert edges[-1] == approx(10e-3)


def test_geometry_validation(geometry):
    with pytest.raises(InvalidGeometry):
        SlitGeometry(500e-9, 0.25e-3, 0.3e-3, 1.0, 20e-3, 1024)
    with pytest.raises(InvalidGeometry):
        SlitGeometry(500e-9, 0.25e-3, 0.05e-3, 1.0, 4e-3, 1024)
    with pytest.raises(InvalidGeometry):
        SlitGeometry(-500e-9, 0.25e-3, 0.05e-3, 1.0, 20e-3, 1024)
    with pytest.raises(InvalidGeometry):
        geometry.with_bins(0)


def test_si_round_trip(geometry):
    assert SlitGeometry.from_si(geometry.to_si()) == geometry


@pytest.mark.parametrize("mode", list(SlitMode))
def test_profile_is_normalized(geometry, mode):
    profile = intensity_profile(geometry, mode)
    assert profile.pdf.sum() == approx(1.0, abs=1e-9)
    assert np.all(profile.pdf >= 0)
    assert np.allclose(profile.pdf, profile.pdf[::-1], rtol=0, atol=1e-15)


def test_one_slit_matches_two_slit_envelope(geometry):
    one = intensity_profile(geometry, SlitMode.ONE).pdf
    two = intensity_profile(geometry, SlitMode.TWO).pdf
    assert np.array_equal(one, two)


def test_profile_bins_are_indeterminate(geometry):
    profile = intensity_profile(geometry)
    centre = geometry.bins // 2
    assert not profile.status(centre).is_determinate


def test_rebin_preserves_mass(geometry):
    profile = intensity_profile(geometry)
    merged = profile.rebin(4)
    assert merged.geometry.bins == 256
    assert merged.pdf.sum() == approx(1.0, abs=1e-9)
    with pytest.raises(InvalidGeometry):
        profile.rebin(3)


def test_fringe_spacing_within_one_bin(geometry):
    spacing = fringe_spacing(geometry)
    assert spacing.analytic == approx(2e-3)
    assert abs(spacing.measured - spacing.analytic) <= geometry.bin_width


def test_intense_beam_equals_profile(geometry):
    pattern = run_intense_beam(geometry, SlitMode.BOTH)
    profile = intensity_profile(geometry, SlitMode.BOTH)
    assert pattern.histogram is None
    assert pattern.beam is BeamMode.INTENSE
    assert np.max(np.abs(pattern.intensity - profile.pdf)) <= 1e-12


def test_weak_beam_counts_sum_to_k(geometry):
    pattern, hits = run_weak_beam(geometry, SlitMode.BOTH, 5000, 1)
    assert pattern.histogram.sum() == 5000
    assert len(hits) == 5000
    assert hits[0].t_omega == 1
    assert hits[-1].photon_index == 4999


def test_weak_beam_is_reproducible(geometry):
    a, _ = run_weak_beam(geometry, SlitMode.BOTH, 2000, 9)
    b, _ = run_weak_beam(geometry, SlitMode.BOTH, 2000, 9)
    c, _ = run_weak_beam(geometry, SlitMode.BOTH, 2000, 10)
    assert a == b
    assert a != c


def test_zero_photons(geometry):
    with pytest.raises(ZeroPhotons):
        run_weak_beam(geometry, SlitMode.BOTH, 0, 1)


def test_emit_wavelet_matches_stream(geometry):
    _, hits = run_weak_beam(geometry, SlitMode.BOTH, 50, 4)
    event = free_flight_event(ErgodicSource(), intensity_profile(geometry))
    for i in (0, 17, 49):
        hit = emit_wavelet(event, i, TrialStream(4))
        assert hit.bin == hits[i].bin
        assert hit.x_position == hits[i].x_position


def test_particle_hit_is_a_dirac_state(geometry):
    _, hits = run_weak_beam(geometry, SlitMode.BOTH, 10, 2)
    hit = hits[3]
    assert hit.status(hit.bin) == Determinate(1)
    assert hit.status((hit.bin + 1) % geometry.bins) == Determinate(0)
    assert hit.record.realized == f"bin{hit.bin}"


def test_weak_beam_chi_square_over_seeds(geometry):
    passing = 0
    for seed in range(10):
        pattern, _ = run_weak_beam(geometry, SlitMode.BOTH, 100_000, seed)
        passing += chi_square_gof(pattern.histogram, pattern.expected).p_value > 0.01
    assert passing >= 8


def test_weak_beam_fringe_fit(geometry):
    pattern, _ = run_weak_beam(geometry, SlitMode.BOTH, 100_000, 7)
    assert fit_fringe_spacing(pattern) == approx(2e-3, rel=0.02)


def test_fringe_fit_needs_both_slits(geometry):
    pattern, _ = run_weak_beam(geometry, SlitMode.ONE, 1000, 7)
    with pytest.raises(FringeFitError):
        fit_fringe_spacing(pattern)


def test_closed_slit_has_no_fringes(geometry):
    fitting = 0
    for seed in range(10):
        pattern, _ = run_weak_beam(geometry, SlitMode.ONE, 100_000, seed)
        fitting += chi_square_gof(pattern.histogram, pattern.expected).p_value > 0.01
        with pytest.raises(TooFewPeaks):
            pattern_peak_spacing(pattern)
    assert fitting >= 8


def test_open_slits_show_fringes_in_counts(geometry):
    pattern, _ = run_weak_beam(geometry, SlitMode.BOTH, 100_000, 3)
    assert pattern_peak_spacing(pattern) == approx(2e-3, rel=0.05)


def test_progressive_pattern_converges(geometry):
    improving = 0
    for seed in range(10):
        small, large = progressive_pattern(geometry, SlitMode.BOTH, [100, 10_000], seed)
        improving += large.ks_distance < small.ks_distance
    assert improving >= 9


def test_progressive_frames_are_prefixes(geometry):
    frames = progressive_pattern(geometry, SlitMode.BOTH, [10, 1000], 5)
    pattern, _ = run_weak_beam(geometry, SlitMode.BOTH, 1000, 5)
    assert np.array_equal(frames[-1].histogram, pattern.histogram)
    assert frames[0].histogram.sum() == 10
    with pytest.raises(ZeroPhotons):
        progressive_pattern(geometry, SlitMode.BOTH, [0, 10], 5)


def test_weak_beam_photon_records_pass_audits(geometry):
    _, hits = run_weak_beam(geometry, SlitMode.BOTH, 10_000, 11)
    records = [hit.record for hit in hits]
    assert audit_tic(records).violations == 0
    assert audit_td(records).violations == 0


def test_photon_bins_have_no_lag_one_correlation(geometry):
    _, hits = run_weak_beam(geometry, SlitMode.BOTH, 100_000, 42)
    bins = hits.bins.astype(float)
    assert abs(np.corrcoef(bins[:-1], bins[1:])[0, 1]) < 0.01


def test_both_slits_exceed_sum_of_single_slits(geometry):
    both = intensity_profile(geometry, SlitMode.BOTH).pdf
    one = intensity_profile(geometry, SlitMode.ONE).pdf
    two = intensity_profile(geometry, SlitMode.TWO).pdf
    assert both.max() > 1.5 * np.max(one + two) / 2


def test_central_bins_are_global_maximum(geometry):
    pdf = intensity_profile(geometry, SlitMode.BOTH).pdf
    centre = geometry.bins // 2
    assert pdf[centre - 1] == approx(pdf.max())
    assert pdf[centre] == approx(pdf.max())


def test_first_dark_fringe_at_half_spacing(geometry):
    pdf = intensity_profile(geometry, SlitMode.BOTH).pdf
    centre = geometry.bins // 2
    right = pdf[centre:]
    first_min = next(
        i for i in range(1, len(right) - 1) if right[i] <= right[i - 1] and right[i] <= right[i + 1]
    )
    x = geometry.bin_centers()[centre + first_min]
    assert abs(x - 1.0e-3) <= geometry.bin_width
    assert pdf[centre + first_min] < 1e-3 * pdf.max()


def test_raw_peak_spacing_shows_envelope_pull(geometry):
    spacing = fringe_spacing(geometry)
    assert spacing.raw < spacing.analytic
    assert abs(spacing.raw - spacing.analytic) <= 3 * geometry.bin_width
    assert abs(spacing.measured - spacing.analytic) <= abs(spacing.raw - spacing.analytic)


def test_with_mode_switches_profile(geometry):
    both = intensity_profile(geometry, SlitMode.BOTH)
    one = both.with_mode(SlitMode.ONE)
    assert one.mode is SlitMode.ONE
    assert np.array_equal(one.pdf, intensity_profile(geometry, SlitMode.ONE).pdf)
