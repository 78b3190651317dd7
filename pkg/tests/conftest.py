"""Shared fixtures: desk-scale characters, envs, and fast agent configs."""

from __future__ import annotations

import numpy as np
import pytest

from motionrl.character import make_pendulum, make_planar_chain
from motionrl.envs.base import EnvConfig
from motionrl.envs.tracking import AmpEnv, TrackingEnv
from motionrl.learning.config import AgentConfig
from motionrl.motion import MotionLibrary
from motionrl.synthetic import make_sine_chain_clip

ELEVATED = (0.0, 1.5, 0.0)


def elevated_chain(num_links: int = 3):
    """Fixed-base chain high enough that no pose touches the ground."""
    return make_planar_chain(num_links=num_links, root_height=1.5)


def sine_library(ch, **kwargs) -> MotionLibrary:
    kwargs.setdefault("root_pos", ELEVATED)
    return MotionLibrary([make_sine_chain_clip(ch, **kwargs)])


def tracking_env_config(**overrides) -> EnvConfig:
    doc = {
        "task": "deepmimic",
        "episode_length": 2.0,
        "engine": {"backend": "kinematic", "control_freq": 30.0, "sim_freq": 30.0},
    }
    doc.update(overrides)
    return EnvConfig.from_dict(doc)


def make_tracking_env(num_envs: int = 4, seed: int = 0, **overrides) -> TrackingEnv:
    ch = elevated_chain()
    return TrackingEnv(ch, num_envs, tracking_env_config(**overrides), sine_library(ch), seed=seed)


def make_amp_env(num_envs: int = 4, seed: int = 0, **overrides) -> AmpEnv:
    ch = elevated_chain()
    cfg = tracking_env_config(task="amp", **overrides)
    return AmpEnv(ch, num_envs, cfg, sine_library(ch), seed=seed)


def fast_agent_config(agent: str = "ppo", **overrides) -> AgentConfig:
    doc = {
        "agent": agent,
        "steps_per_env": 8,
        "epochs": 2,
        "minibatches": 2,
        "model": {"hidden_sizes": [32, 32]},
    }
    if agent in ("amp", "add"):
        doc["disc"] = {"steps": 4, "batch_size": 64}
    if agent == "awr":
        doc["awr"] = {"batch_size": 64}
    doc.update(overrides)
    return AgentConfig.from_dict(doc)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def chain():
    return elevated_chain()


@pytest.fixture
def pendulum():
    return make_pendulum()
