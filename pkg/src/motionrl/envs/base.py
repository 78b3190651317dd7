"""Vectorized environment core: done flags, step results, configs.

Envs own the batched simulation state through an engine and expose a
reset/step interface over flat observation and action vectors. A step whose
done flag is not NULL marks the env for auto-reset: the reset happens at the
start of the next step, so the observation returned alongside the terminal
flag is the final observation of the finished episode, and the next step's
incoming action is applied to the freshly reset state.
"""

from __future__ import annotations

import copy
import enum
from dataclasses import dataclass, field

import numpy as np

from ..character import (
    CharacterModel,
    character_from_dict,
    make_pendulum,
    make_planar_chain,
    resolve_character,
)
from ..engine import Engine, EngineConfig, build_engine
from ..kinematics import zero_pose, zero_velocity
from ..rotations import exp_map_to_quat, up_index


class DoneFlag(enum.IntEnum):
    """Episode status after a step; FAIL beats SUCC beats TIME beats NULL."""

    NULL = 0
    FAIL = 1
    SUCC = 2
    TIME = 3


def combine_done(fail: np.ndarray, succ: np.ndarray, time: np.ndarray) -> np.ndarray:
    """Merge boolean termination masks into flags honoring the precedence."""
    out = np.where(time, int(DoneFlag.TIME), int(DoneFlag.NULL))
    out = np.where(succ, int(DoneFlag.SUCC), out)
    out = np.where(fail, int(DoneFlag.FAIL), out)
    return out.astype(np.int64)


@dataclass
class StepResult:
    obs: np.ndarray  # (E, obs_dim)
    reward: np.ndarray  # (E,)
    done: np.ndarray  # (E,) DoneFlag values
    info: dict = field(default_factory=dict)


class EnvConfigError(ValueError):
    """Raised when an environment configuration is invalid."""


@dataclass
class PoseErrorTermination:
    enabled: bool = True
    threshold: float = 1.0  # meters, mean body position error


@dataclass
class RewardWeights:
    """Tracking reward: w.exp(-alpha * squared error) per component."""

    pose: float = 0.65
    velocity: float = 0.10
    end_effector: float = 0.15
    root: float = 0.10
    pose_scale: float = 2.0
    velocity_scale: float = 0.1
    end_effector_scale: float = 40.0
    root_scale: float = 10.0

    def weight_sum(self) -> float:
        return self.pose + self.velocity + self.end_effector + self.root


TASKS = ("deepmimic", "amp", "add", "target_location", "view_motion")


@dataclass
class TargetTaskConfig:
    succ_radius: float = 0.3  # meters
    dwell_time: float = 0.5  # seconds inside the radius before SUCC
    goal_range: float = 4.0  # goals sampled uniformly in a square of this half-size


@dataclass
class EnvConfig:
    task: str = "deepmimic"
    character: object = "chain3"  # asset name, path, or inline dict
    motion_file: str | None = None
    episode_length: float = 10.0  # seconds
    engine: EngineConfig = field(default_factory=EngineConfig)
    pose_error_termination: PoseErrorTermination = field(default_factory=PoseErrorTermination)
    contact_termination_bodies: list | None = None  # None: every non-leaf body
    min_root_height: float | None = None
    rsi: bool | None = None  # None: on for deepmimic/add, off otherwise
    # reference: reset onto the reference clip (honoring rsi)
    # default: reset to the character's rest pose plus reset_noise
    reset_mode: str = "reference"
    action_scale: float = 1.0
    reset_noise: float = 0.05
    reward: RewardWeights = field(default_factory=RewardWeights)
    target: TargetTaskConfig = field(default_factory=TargetTaskConfig)

    def __post_init__(self):
        if self.task not in TASKS:
            raise EnvConfigError(f"unknown task {self.task!r}; expected one of {TASKS}")
        if self.reset_mode not in ("reference", "default"):
            raise EnvConfigError(
                f"reset_mode must be 'reference' or 'default', got {self.reset_mode!r}"
            )
        if self.episode_length <= 0:
            raise EnvConfigError("episode_length must be positive seconds")
        if isinstance(self.engine, dict):
            self.engine = EngineConfig.from_dict(self.engine)
        if isinstance(self.pose_error_termination, dict):
            self.pose_error_termination = PoseErrorTermination(**self.pose_error_termination)
        if isinstance(self.reward, dict):
            self.reward = RewardWeights(**self.reward)
        if isinstance(self.target, dict):
            self.target = TargetTaskConfig(**self.target)

    @classmethod
    def from_dict(cls, doc: dict) -> "EnvConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise EnvConfigError(
                f"unknown env config keys: {sorted(unknown)}; valid keys: {sorted(known)}"
            )
        return cls(**doc)

    @property
    def use_rsi(self) -> bool:
        if self.rsi is not None:
            return bool(self.rsi)
        return self.task in ("deepmimic", "add")


def resolve_env_character(spec) -> CharacterModel:
    """Character from an asset name, a file path, or an inline dict.

    Dict forms: {"type": "planar_chain", ...} / {"type": "pendulum", ...}
    for the built-in generators, or a full character document with joints
    and bodies.
    """
    if isinstance(spec, CharacterModel):
        return spec
    if isinstance(spec, dict):
        if "joints" in spec:
            return character_from_dict(spec)
        kind = spec.get("type")
        params = {k: v for k, v in spec.items() if k != "type"}
        if kind == "planar_chain":
            return make_planar_chain(**params)
        if kind == "pendulum":
            return make_pendulum(**params)
        raise EnvConfigError(f"unknown character type {kind!r}")
    return resolve_character(spec)


def default_reset_state(ch: CharacterModel, n: int, rng: np.random.Generator, noise: float):
    """Rest pose at the character's root height, joints jittered by noise."""
    pose = zero_pose(ch, (n,))
    vel = zero_velocity(ch, (n,))
    pose.root_pos[:] = 0.0
    pose.root_pos[:, up_index(ch.up_axis)] = ch.extras.get("root_height", 0.0)
    if noise > 0:
        dof_noise = rng.uniform(-noise, noise, size=(n, ch.dof_count))
        off = 0
        for k, j in enumerate(ch.joints):
            if j.kind == "spherical":
                pose.joint_rot[k] = exp_map_to_quat(dof_noise[:, off : off + 3])
            elif j.kind == "revolute":
                pose.joint_rot[k] = dof_noise[:, off]
            off += j.dof
    return pose, vel


class VectorEnv:
    """Batched env base: auto-reset bookkeeping and done-flag assembly."""

    def __init__(
        self,
        character: CharacterModel,
        num_envs: int,
        config: EnvConfig,
        seed: int = 0,
    ):
        self.character = character
        self.num_envs = num_envs
        self.config = config
        self.rng = np.random.default_rng(seed)
        self.engine: Engine = build_engine(
            character, num_envs, config.engine, rng=np.random.default_rng(self.rng.integers(2**63))
        )
        self.control_dt = self.engine.control_dt
        self.episode_steps = max(1, int(round(config.episode_length * config.engine.control_freq)))
        self.steps = np.zeros(num_envs, dtype=np.int64)
        self._pending = np.zeros(num_envs, dtype=bool)
        self._termination_bodies = self._resolve_termination_bodies()

    def _resolve_termination_bodies(self) -> np.ndarray:
        names = self.config.contact_termination_bodies
        if names is None:
            leaves = set(self.character.end_effector_bodies())
            idx = [b for b in range(self.character.num_bodies) if b not in leaves]
        else:
            idx = [self.character.body_index(n) for n in names]
        return np.asarray(idx, dtype=np.int64)

    # -- dimensions -----------------------------------------------------------
    @property
    def action_dim(self) -> int:
        return self.character.dof_count

    @property
    def obs_dim(self) -> int:
        raise NotImplementedError

    @property
    def disc_obs_dim(self) -> int:
        """Width of info['disc_obs'] rows; 0 when the task has none."""
        return 0

    # -- interface -------------------------------------------------------------
    def reset(self, env_indices=None) -> np.ndarray:
        if env_indices is None:
            env_indices = np.arange(self.num_envs)
        env_indices = np.asarray(env_indices, dtype=np.int64)
        self._reset_envs(env_indices)
        self.steps[env_indices] = 0
        self._pending[env_indices] = False
        return self._observe(self.engine.state())[env_indices]

    def step(self, actions) -> StepResult:
        actions = np.asarray(actions, dtype=np.float64)
        if actions.shape != (self.num_envs, self.action_dim):
            raise ValueError(
                f"actions must have shape ({self.num_envs}, {self.action_dim}), "
                f"got {actions.shape}"
            )
        bad_action = ~np.all(np.isfinite(actions), axis=-1)
        if np.any(bad_action):
            actions = np.where(np.isfinite(actions), actions, 0.0)
        if np.any(self._pending):
            idx = np.flatnonzero(self._pending)
            self._reset_envs(idx)
            self.steps[idx] = 0
            self._pending[:] = False

        commands = self._commands(actions)
        state = self.engine.step(commands)
        state = self._post_step(state)
        self.steps += 1

        reward = self._reward(state)
        fail, succ, time = self._terminations(state)
        fail = fail | bad_action | state.failed
        done = combine_done(fail, succ, time)
        obs = self._observe(state)
        info = self._info(state)
        self._pending = done != int(DoneFlag.NULL)
        return StepResult(obs=obs, reward=reward, done=done, info=info)

    # -- checkpoint support ------------------------------------------------------
    def snapshot(self) -> dict:
        """Full mutable env state (engine, counters, rng) for checkpointing."""
        return {
            "steps": self.steps.copy(),
            "pending": self._pending.copy(),
            "rng": copy.deepcopy(self.rng.bit_generator.state),
            "engine": self.engine.snapshot(),
            "extra": self._snapshot_extra(),
        }

    def restore(self, snap: dict) -> None:
        self.steps[:] = snap["steps"]
        self._pending[:] = snap["pending"]
        self.rng.bit_generator.state = copy.deepcopy(snap["rng"])
        self.engine.restore(snap["engine"])
        self._restore_extra(snap["extra"])

    def observe(self) -> np.ndarray:
        """Observation for the current state without stepping."""
        return self._observe(self.engine.state())

    def _snapshot_extra(self) -> dict:
        return {}

    def _restore_extra(self, extra: dict) -> None:
        pass

    # -- shared termination checks ----------------------------------------------
    def _common_failures(self, state) -> np.ndarray:
        fail = np.zeros(self.num_envs, dtype=bool)
        if self._termination_bodies.size:
            fail |= np.any(state.contacts[:, self._termination_bodies], axis=-1)
        if self.config.min_root_height is not None:
            from ..rotations import up_index

            up = up_index(self.character.up_axis)
            fail |= state.pose.root_pos[:, up] < self.config.min_root_height
        return fail

    def _time_limit(self) -> np.ndarray:
        return self.steps >= self.episode_steps

    # -- task hooks ---------------------------------------------------------------
    def _reset_envs(self, env_indices: np.ndarray) -> None:
        raise NotImplementedError

    def _commands(self, actions: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _post_step(self, state):
        return state

    def _reward(self, state) -> np.ndarray:
        raise NotImplementedError

    def _terminations(self, state):
        raise NotImplementedError

    def _observe(self, state) -> np.ndarray:
        raise NotImplementedError

    def _info(self, state) -> dict:
        return {}
