"""Tests for checkpoint file IO and payload compatibility checks."""

from __future__ import annotations

import numpy as np
import pytest
import torch

from conftest import fast_agent_config, make_tracking_env
from motionrl.learning.agents import CheckpointError, build_agent
from motionrl.learning.checkpoint import load_checkpoint, save_checkpoint
from motionrl.learning.distributed import WorkerGroup
from motionrl.learning.models import flat_parameters


def env_builder(num_envs: int, seed: int):
    return make_tracking_env(num_envs=num_envs, seed=seed)


def seeded_agent(env, config, seed: int):
    # Model weights draw from torch's global RNG; seed it like the worker group does.
    torch.manual_seed(seed)
    return build_agent(env, config, seed=seed)


def test_save_and_load_round_trip(tmp_path):
    group = WorkerGroup(env_builder, fast_agent_config(), num_envs=4, num_workers=1, seed=0)
    group.train_iteration()
    payload = group.state()
    path = tmp_path / "runs" / "ckpt.pt"
    save_checkpoint(path, payload)
    assert path.exists()
    assert not path.with_suffix(".pt.tmp").exists()

    loaded = load_checkpoint(path)
    assert loaded["num_workers"] == 1
    restored = WorkerGroup(env_builder, fast_agent_config(), num_envs=4, num_workers=1, seed=55)
    restored.load_state(loaded)
    assert torch.equal(flat_parameters(restored.lead.model), flat_parameters(group.lead.model))
    assert restored.lead.iteration == group.lead.iteration
    assert np.array_equal(restored.lead._obs, group.lead._obs)


def test_save_creates_parent_directories(tmp_path):
    path = tmp_path / "a" / "b" / "c.pt"
    save_checkpoint(path, {"workers": []})
    assert load_checkpoint(path) == {"workers": []}


def test_overwrite_is_atomic_replacement(tmp_path):
    path = tmp_path / "ckpt.pt"
    save_checkpoint(path, {"workers": [], "tag": 1})
    save_checkpoint(path, {"workers": [], "tag": 2})
    assert load_checkpoint(path)["tag"] == 2


def test_missing_file_error(tmp_path):
    with pytest.raises(CheckpointError, match="not found"):
        load_checkpoint(tmp_path / "nope.pt")


def test_non_checkpoint_payload_error(tmp_path):
    path = tmp_path / "junk.pt"
    torch.save({"something": "else"}, path)
    with pytest.raises(CheckpointError, match="not a checkpoint file"):
        load_checkpoint(path)
    torch.save([1, 2, 3], path)
    with pytest.raises(CheckpointError, match="not a checkpoint file"):
        load_checkpoint(path)


def test_agent_type_mismatch_rejected():
    env = make_tracking_env()
    payload = seeded_agent(env, fast_agent_config("ppo"), seed=0).state()
    other = seeded_agent(make_tracking_env(), fast_agent_config("awr"), seed=0)
    with pytest.raises(CheckpointError, match="agent"):
        other.load_state(payload)


def test_architecture_mismatch_rejected():
    payload = seeded_agent(make_tracking_env(), fast_agent_config(), seed=0).state()
    wide = fast_agent_config(model={"hidden_sizes": [64, 64]})
    other = seeded_agent(make_tracking_env(), wide, seed=0)
    with pytest.raises(CheckpointError, match="architecture"):
        other.load_state(payload)


def test_version_mismatch_rejected():
    payload = seeded_agent(make_tracking_env(), fast_agent_config(), seed=0).state()
    payload["version"] = -1
    other = seeded_agent(make_tracking_env(), fast_agent_config(), seed=0)
    with pytest.raises(CheckpointError, match="version"):
        other.load_state(payload)


def test_file_round_trip_preserves_training_stream(tmp_path):
    """Training after a file round trip matches uninterrupted training."""
    config = fast_agent_config()
    straight = WorkerGroup(env_builder, config, num_envs=4, num_workers=1, seed=9)
    for _ in range(2):
        straight.train_iteration()

    other = WorkerGroup(env_builder, config, num_envs=4, num_workers=1, seed=9)
    for _ in range(2):
        other.train_iteration()
    path = tmp_path / "mid.pt"
    save_checkpoint(path, other.state())

    resumed = WorkerGroup(env_builder, config, num_envs=4, num_workers=1, seed=31)
    resumed.load_state(load_checkpoint(path))
    a = straight.train_iteration()
    b = resumed.train_iteration()
    assert a.keys() == b.keys()
    for k in a:
        assert np.all(np.asarray(a[k]) == np.asarray(b[k])), k
