import numpy as np
import pytest
from pytest import approx

from src.utils.rng import TrialStream, uniforms_for


def test_same_seed_same_stream():
    a = TrialStream(42).uniforms(0, 1000)
    b = TrialStream(42).uniforms(0, 1000)
    assert np.array_equal(a, b)


def test_different_seeds_differ():
    assert not np.array_equal(TrialStream(1).uniforms(0, 100), TrialStream(2).uniforms(0, 100))


def test_random_access_matches_block():
    stream = TrialStream(7)
    block = stream.uniforms(0, 50)
    assert [stream.uniform(i) for i in range(50)] == block.tolist()
    assert np.array_equal(stream.uniforms(20, 50), block[20:])


def test_uniforms_in_unit_interval():
    u = TrialStream(3).uniforms(0, 100_000)
    assert u.min() >= 0.0
    assert u.max() < 1.0
    assert u.mean() == approx(0.5, abs=0.01)
    assert (u ** 2).mean() == approx(1 / 3, abs=0.01)


def test_seed_wraps_to_64_bits():
    assert np.array_equal(uniforms_for(2 ** 64 + 5, np.arange(10)), uniforms_for(5, np.arange(10)))


def test_child_streams_are_distinct_and_reproducible():
    parent = TrialStream(11)
    assert np.array_equal(parent.child(1).uniforms(0, 10), TrialStream(11).child(1).uniforms(0, 10))
    assert not np.array_equal(parent.child(1).uniforms(0, 10), parent.child(2).uniforms(0, 10))
    assert not np.array_equal(parent.child(1).uniforms(0, 10), parent.uniforms(0, 10))


def test_negative_index_rejected():
    with pytest.raises(ValueError):
        TrialStream(0).uniform(-1)
    with pytest.raises(ValueError):
        TrialStream(0).uniforms(5, 2)


def test_offset_seed_is_not_a_shifted_copy():
    gamma = 0x9E3779B97F4A7C15
    shifted = TrialStream(5 + gamma).uniforms(0, 100)
    assert not np.array_equal(TrialStream(5).uniforms(1, 101), shifted)


def test_adjacent_seeds_are_uncorrelated():
    a = TrialStream(100).uniforms(0, 100_000)
    b = TrialStream(101).uniforms(0, 100_000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.02
