"""Rollout and replay storage behavior."""

import collections

import numpy as np
import pytest

from motionrl.learning.buffer import ExperienceBuffer, RingBuffer


def filled_step(rng, num_envs, obs_dim, action_dim):
    return dict(
        obs=rng.normal(size=(num_envs, obs_dim)),
        actions=rng.normal(size=(num_envs, action_dim)),
        logprobs=rng.normal(size=num_envs),
        values=rng.normal(size=num_envs),
        rewards=rng.normal(size=num_envs),
        dones=rng.integers(0, 4, size=num_envs),
        next_values=rng.normal(size=num_envs),
    )


def test_experience_buffer_layout_and_fill(rng):
    buf = ExperienceBuffer(steps_per_env=3, num_envs=2, obs_dim=5, action_dim=4)
    steps = [filled_step(rng, 2, 5, 4) for _ in range(3)]
    for k, step in enumerate(steps):
        assert not buf.full
        assert buf.size == k * 2
        buf.add(**step)
    assert buf.full
    assert buf.size == 6
    for k, step in enumerate(steps):
        assert np.array_equal(buf.obs[k], step["obs"])
        assert np.array_equal(buf.rewards[k], step["rewards"])
        assert np.array_equal(buf.dones[k], step["dones"])
    with pytest.raises(RuntimeError, match="full"):
        buf.add(**filled_step(rng, 2, 5, 4))
    buf.clear()
    assert not buf.full and buf.size == 0
    buf.add(**filled_step(rng, 2, 5, 4))
    assert buf.size == 2


def test_experience_buffer_disc_obs_rows(rng):
    buf = ExperienceBuffer(2, 2, 3, 2, disc_obs_dim=6)
    step = filled_step(rng, 2, 3, 2)
    with pytest.raises(ValueError, match="disc_obs"):
        buf.add(**step)
    disc = rng.normal(size=(2, 6))
    buf.add(**step, disc_obs=disc)
    assert np.array_equal(buf.disc_obs[0], disc)

    plain = ExperienceBuffer(2, 2, 3, 2)
    assert plain.disc_obs is None


def test_ring_buffer_wraparound_matches_deque(rng):
    capacity = 17
    ring = RingBuffer(capacity, {"x": 3})
    oracle = collections.deque(maxlen=capacity)
    for _ in range(25):
        n = int(rng.integers(1, 6))
        rows = rng.normal(size=(n, 3))
        ring.add(x=rows)
        oracle.extend(rows)
        assert len(ring) == len(oracle)
    kept = np.asarray(oracle)
    stored = ring.arrays["x"]
    # every retained row is stored and every stored live row was retained
    for row in kept:
        assert np.any(np.all(stored == row, axis=-1))
    samples = ring.sample(200, np.random.default_rng(0))["x"]
    for row in samples:
        assert np.any(np.all(kept == row, axis=-1))


def test_ring_buffer_multiple_fields_stay_aligned(rng):
    ring = RingBuffer(8, {"a": 2, "b": 1})
    a = rng.normal(size=(12, 2))
    b = a.sum(axis=-1, keepdims=True)  # keyed to its row
    for k in range(12):
        ring.add(a=a[k : k + 1], b=b[k : k + 1])
    out = ring.sample(50, np.random.default_rng(1))
    assert np.allclose(out["a"].sum(axis=-1, keepdims=True), out["b"])


def test_ring_buffer_field_name_mismatch(rng):
    ring = RingBuffer(4, {"x": 2})
    with pytest.raises(ValueError, match="fields"):
        ring.add(y=rng.normal(size=(1, 2)))


def test_ring_buffer_empty_sample_raises():
    ring = RingBuffer(4, {"x": 2})
    with pytest.raises(RuntimeError, match="empty"):
        ring.sample(1, np.random.default_rng(0))


def test_ring_buffer_state_round_trip(rng):
    ring = RingBuffer(6, {"x": 2, "y": 1})
    for _ in range(4):
        ring.add(x=rng.normal(size=(3, 2)), y=rng.normal(size=(3, 1)))
    clone = RingBuffer(6, {"x": 2, "y": 1})
    clone.load_state(ring.state())
    assert len(clone) == len(ring)
    s1 = ring.sample(10, np.random.default_rng(7))
    s2 = clone.sample(10, np.random.default_rng(7))
    for key in s1:
        assert np.array_equal(s1[key], s2[key])
    # continued writes agree too
    more = rng.normal(size=(2, 2)), rng.normal(size=(2, 1))
    ring.add(x=more[0], y=more[1])
    clone.add(x=more[0], y=more[1])
    assert ring.pos == clone.pos
    assert np.array_equal(ring.arrays["x"], clone.arrays["x"])
