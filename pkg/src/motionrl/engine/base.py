"""Engine abstraction: a unified batched stepping interface over backends.

An engine owns the per-env simulation state. Each control step advances all
envs by 1/control_freq seconds, internally taking ``substeps`` integrator
steps of 1/sim_freq seconds. Commands are per-env flat vectors of length
``dof_count`` whose meaning depends on the control mode:

  none    commands have no effect on the simulation
  pos     PD targets per joint (revolute angle / spherical exp map)
  vel     target velocities per joint, imposed kinematically
  torque  joint torques, clamped to per-joint limits
  pd_1d   PD targets for 1D revolute joints only (rejected at configuration
          time for characters with spherical joints)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..character import CharacterModel
from ..kinematics import Pose, PoseVelocity
from ..rotations import exp_map_to_quat, quat_conjugate, quat_mul, quat_to_exp_map

CONTROL_MODES = ("none", "pos", "vel", "torque", "pd_1d")


class EngineConfigError(ValueError):
    """Raised when an engine configuration is invalid."""


@dataclass
class ContactParams:
    kn: float = 3.0e4  # normal spring, N/m
    dn: float = 300.0  # normal damper, N*s/m
    kt: float = 300.0  # tangential damper, N*s/m
    mu: float = 0.8  # Coulomb cap on tangential force
    tolerance: float = 2.0e-3  # contact-flag height tolerance, m


@dataclass
class EngineConfig:
    backend: str = "kinematic"  # kinematic | planar_dynamics
    control_mode: str = "pos"
    control_freq: float = 30.0
    sim_freq: float = 600.0
    gravity: tuple[float, float, float] = (0.0, 0.0, -9.81)
    ground_height: float = 0.0
    contact: ContactParams = field(default_factory=ContactParams)
    actuation_noise: float = 0.0  # kinematic backend only

    def __post_init__(self):
        if self.control_mode not in CONTROL_MODES:
            raise EngineConfigError(f"unknown control mode {self.control_mode!r}")
        if self.control_freq <= 0 or self.sim_freq <= 0:
            raise EngineConfigError("frequencies must be positive")
        ratio = self.sim_freq / self.control_freq
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise EngineConfigError(
                f"sim_freq {self.sim_freq} must be a positive integer multiple of "
                f"control_freq {self.control_freq}"
            )
        if isinstance(self.contact, dict):
            self.contact = ContactParams(**self.contact)

    @property
    def substeps(self) -> int:
        return int(round(self.sim_freq / self.control_freq))

    @property
    def control_dt(self) -> float:
        return 1.0 / self.control_freq

    @classmethod
    def from_dict(cls, doc: dict) -> "EngineConfig":
        known = {
            "backend",
            "control_mode",
            "control_freq",
            "sim_freq",
            "gravity",
            "ground_height",
            "contact",
            "actuation_noise",
        }
        unknown = set(doc) - known
        if unknown:
            raise EngineConfigError(f"unknown engine config keys: {sorted(unknown)}")
        kwargs = dict(doc)
        if "gravity" in kwargs:
            g = kwargs["gravity"]
            if len(g) != 3:
                raise EngineConfigError("gravity must be a 3-vector")
            kwargs["gravity"] = tuple(float(x) for x in g)
        return cls(**kwargs)


@dataclass
class SimState:
    """Per-env state snapshot: pose, velocity, contact and failure flags."""

    pose: Pose
    vel: PoseVelocity
    contacts: np.ndarray  # (..., num_bodies) bool
    failed: np.ndarray  # (...,) bool

    def copy(self) -> "SimState":
        return SimState(self.pose.copy(), self.vel.copy(), self.contacts.copy(), self.failed.copy())


def pd_torque(q, qdot, q_target, kp: float, kd: float, torque_limit: float):
    """PD torque for one joint, clamped to the torque limit.

    Revolute joints pass scalars; spherical joints pass quaternions for
    q/q_target and a 3-vector angular velocity, and the position error is
    the exp map of q^-1 * q_target.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.shape[-1:] == (4,):
        err = quat_to_exp_map(quat_mul(quat_conjugate(q), np.asarray(q_target, dtype=np.float64)))
    else:
        err = np.asarray(q_target, dtype=np.float64) - q
    tau = kp * err - kd * np.asarray(qdot, dtype=np.float64)
    return np.clip(tau, -torque_limit, torque_limit)


class Engine:
    """Base class; concrete engines implement _step_substeps and state IO."""

    def __init__(self, character: CharacterModel, num_envs: int, config: EngineConfig):
        if num_envs < 1:
            raise EngineConfigError("num_envs must be >= 1")
        has_spherical = any(j.kind == "spherical" for j in character.joints)
        if config.control_mode == "pd_1d" and has_spherical:
            raise EngineConfigError(
                "pd_1d control mode requires an all-revolute character; "
                f"{character.name!r} has spherical joints"
            )
        self.character = character
        self.num_envs = num_envs
        self.config = config
        self._failed = np.zeros(num_envs, dtype=bool)

    @property
    def dof_count(self) -> int:
        return self.character.dof_count

    @property
    def control_dt(self) -> float:
        return self.config.control_dt

    def _validate_commands(self, commands) -> np.ndarray:
        if commands is None:
            return np.zeros((self.num_envs, self.dof_count), dtype=np.float64)
        commands = np.asarray(commands, dtype=np.float64)
        if commands.shape != (self.num_envs, self.dof_count):
            raise ValueError(
                f"commands must have shape ({self.num_envs}, {self.dof_count}), "
                f"got {commands.shape}"
            )
        bad = ~np.all(np.isfinite(commands), axis=-1)
        if np.any(bad):
            self._failed |= bad
            commands = np.where(np.isfinite(commands), commands, 0.0)
        return commands

    def step(self, commands=None) -> SimState:
        """Advance every env by one control step and return the new state."""
        commands = self._validate_commands(commands)
        self._step_substeps(commands)
        return self.state()

    # -- implemented by backends -------------------------------------------
    def _step_substeps(self, commands: np.ndarray) -> None:
        raise NotImplementedError

    def state(self) -> SimState:
        raise NotImplementedError

    def get_state(self, env_index: int) -> SimState:
        if not 0 <= env_index < self.num_envs:
            raise IndexError(f"env index {env_index} out of range [0, {self.num_envs})")
        s = self.state()
        return SimState(
            pose=Pose(
                s.pose.root_pos[env_index],
                s.pose.root_rot[env_index],
                [None if r is None else r[env_index] for r in s.pose.joint_rot],
            ),
            vel=PoseVelocity(
                s.vel.root_lin_vel[env_index],
                s.vel.root_ang_vel[env_index],
                s.vel.dof_vel[env_index],
            ),
            contacts=s.contacts[env_index],
            failed=s.failed[env_index],
        )

    def set_state(self, env_index: int, state: SimState) -> None:
        if not 0 <= env_index < self.num_envs:
            raise IndexError(f"env index {env_index} out of range [0, {self.num_envs})")
        idx = np.array([env_index])
        pose = Pose(
            state.pose.root_pos[None],
            state.pose.root_rot[None],
            [None if r is None else np.asarray(r)[None] for r in state.pose.joint_rot],
        )
        vel = PoseVelocity(
            state.vel.root_lin_vel[None],
            state.vel.root_ang_vel[None],
            state.vel.dof_vel[None],
        )
        self.write_state(idx, pose, vel)
        self._failed[env_index] = bool(np.asarray(state.failed))

    def write_state(self, env_indices: np.ndarray, pose: Pose, vel: PoseVelocity) -> None:
        """Batched state writer used by resets; clears failure flags."""
        raise NotImplementedError

    def snapshot(self) -> dict:
        """Full mutable state as plain arrays, for checkpointing."""
        raise NotImplementedError

    def restore(self, snap: dict) -> None:
        raise NotImplementedError

    def clear_failed(self, env_indices) -> None:
        self._failed[env_indices] = False


def dof_targets_to_quats(ch: CharacterModel, targets: np.ndarray):
    """Split a flat target vector into per-joint targets (quat or angle)."""
    out = []
    off = 0
    for j in ch.joints:
        if j.kind == "spherical":
            out.append(exp_map_to_quat(targets[..., off : off + 3]))
        elif j.kind == "revolute":
            out.append(targets[..., off])
        else:
            out.append(None)
        off += j.dof
    return out
