"""Simulation backends with a unified batched control-step interface."""

from __future__ import annotations

import numpy as np

from ..character import CharacterModel
from .base import (
    CONTROL_MODES,
    ContactParams,
    Engine,
    EngineConfig,
    EngineConfigError,
    SimState,
    pd_torque,
)
from .kinematic import KinematicEngine
from .planar import PlanarEngine

BACKENDS = ("kinematic", "planar_dynamics")


def build_engine(
    character: CharacterModel,
    num_envs: int,
    config: EngineConfig,
    rng: np.random.Generator | None = None,
) -> Engine:
    if config.backend == "kinematic":
        return KinematicEngine(character, num_envs, config, rng=rng)
    if config.backend == "planar_dynamics":
        return PlanarEngine(character, num_envs, config)
    raise EngineConfigError(f"unknown backend {config.backend!r}; expected one of {BACKENDS}")


__all__ = [
    "BACKENDS",
    "CONTROL_MODES",
    "ContactParams",
    "Engine",
    "EngineConfig",
    "EngineConfigError",
    "KinematicEngine",
    "PlanarEngine",
    "SimState",
    "build_engine",
    "pd_torque",
]
