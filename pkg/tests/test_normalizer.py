"""Running-moment normalizer vs two-pass numpy statistics."""

import numpy as np
import pytest

from motionrl.learning.normalizer import RunningNormalizer


def test_single_batch_matches_numpy(rng):
    data = rng.normal(size=(128, 5)) * rng.uniform(0.5, 3.0, size=5) + 2.0
    norm = RunningNormalizer(5)
    norm.update(data)
    assert np.allclose(norm.mean, data.mean(axis=0), atol=1e-12)
    assert np.allclose(norm.variance, data.var(axis=0), atol=1e-12)


def test_chunked_updates_match_concatenated(rng):
    data = rng.normal(size=(1000, 4)) * 5.0 - 1.0
    chunked = RunningNormalizer(4)
    start = 0
    for size in (1, 7, 100, 250, 642):
        chunked.update(data[start : start + size])
        start += size
    assert start == len(data)
    whole = RunningNormalizer(4)
    whole.update(data)
    assert np.allclose(chunked.mean, whole.mean, atol=1e-10)
    assert np.allclose(chunked.variance, whole.variance, atol=1e-10)
    assert np.allclose(chunked.mean, data.mean(axis=0), atol=1e-10)
    assert np.allclose(chunked.variance, data.var(axis=0), atol=1e-10)


def test_merge_order_independent(rng):
    a = rng.normal(size=(50, 3)) + 10.0
    b = rng.normal(size=(200, 3)) * 0.1
    ab = RunningNormalizer(3)
    ab.update(a)
    ab.update(b)
    ba = RunningNormalizer(3)
    ba.update(b)
    ba.update(a)
    assert np.allclose(ab.mean, ba.mean, atol=1e-10)
    assert np.allclose(ab.variance, ba.variance, atol=1e-10)


def test_hand_case_batch_123():
    norm = RunningNormalizer(1)
    norm.update(np.array([[1.0], [2.0], [3.0]]))
    assert norm.count == 3.0
    assert np.allclose(norm.mean, [2.0])
    assert np.allclose(norm.m2, [2.0])  # (1-2)^2 + (2-2)^2 + (3-2)^2
    assert np.allclose(norm.variance, [2.0 / 3.0])


def test_normalize_standardizes_and_clips(rng):
    data = rng.normal(size=(500, 2)) * np.array([3.0, 0.5]) + np.array([-4.0, 7.0])
    norm = RunningNormalizer(2, clip=2.0)
    norm.update(data)
    z = norm.normalize(data)
    assert np.all(np.abs(z) <= 2.0)
    # the bulk of the data standardizes to roughly zero mean, unit spread
    inner = norm.normalize(data.mean(axis=0)[None, :])
    assert np.allclose(inner, 0.0, atol=1e-9)
    one_sigma = norm.normalize((data.mean(axis=0) + data.std(axis=0))[None, :])
    assert np.allclose(one_sigma, 1.0, atol=1e-2)


def test_zero_count_passes_input_through_scaled():
    norm = RunningNormalizer(3)
    assert np.allclose(norm.variance, 1.0)
    x = np.array([[0.5, -0.25, 1.5]])
    assert np.allclose(norm.normalize(x), x, atol=1e-5)


def test_empty_update_is_a_no_op():
    norm = RunningNormalizer(2)
    norm.update(np.array([[1.0, 2.0]]))
    before = norm.state()
    norm.merge_moments(0.0, np.zeros(2), np.zeros(2))
    assert norm.count == before["count"]
    assert np.array_equal(norm.mean, before["mean"])


def test_state_round_trip(rng):
    norm = RunningNormalizer(4, clip=5.0)
    norm.update(rng.normal(size=(37, 4)))
    other = RunningNormalizer(4)
    other.load_state(norm.state())
    x = rng.normal(size=(10, 4))
    assert np.array_equal(norm.normalize(x), other.normalize(x))


def test_load_state_rejects_dim_mismatch(rng):
    norm = RunningNormalizer(4)
    norm.update(rng.normal(size=(8, 4)))
    other = RunningNormalizer(3)
    with pytest.raises(ValueError, match="dim mismatch"):
        other.load_state(norm.state())


def test_seeded_random_streams(rng):
    # many random chunk splits all agree with the two-pass answer
    for trial in range(20):
        local = np.random.default_rng(trial)
        data = local.normal(size=(local.integers(10, 300), 3)) * local.uniform(0.1, 4.0)
        norm = RunningNormalizer(3)
        start = 0
        while start < len(data):
            size = int(local.integers(1, 50))
            norm.update(data[start : start + size])
            start += size
        assert np.allclose(norm.mean, data.mean(axis=0), atol=1e-10)
        assert np.allclose(norm.variance, data.var(axis=0), atol=1e-10)
