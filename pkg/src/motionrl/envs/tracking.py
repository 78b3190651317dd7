"""Reference-motion tasks: synchronized tracking, style imitation, playback.

Timeline convention shared by these tasks: at each step the command targets
the reference at t + dt (the pose the character should reach by the end of
the step), the reference clock then advances to t + dt, and the reward and
termination checks compare the post-step simulated state against that same
reference sample. Feeding zero actions on a kinematic backend therefore
reproduces the reference exactly up to finite-difference velocity error.
"""

from __future__ import annotations

import numpy as np

from ..character import CharacterModel
from ..engine.kinematic import KinematicEngine
from ..kinematics import Pose, PoseVelocity, dof_from_pose, zero_pose, zero_velocity
from ..metrics import instant_pose_error, instant_velocity_error
from ..motion import MotionLibrary, sample_pose
from ..rotations import quat_conjugate, quat_mul, quat_to_exp_map
from .base import EnvConfig, VectorEnv, default_reset_state
from .features import (
    add_difference_dim,
    add_difference_obs,
    amp_observation_dim,
    amp_observation_pair,
    proprio_dim,
    proprio_features,
)
from .rewards import tracking_reward


class ClipSet:
    """Batched pose sampling across a library with per-env clip choices."""

    def __init__(self, ch: CharacterModel, library: MotionLibrary):
        self.ch = ch
        self.library = library
        self.durations = np.array([c.duration for c in library.clips], dtype=np.float64)
        self.loop_none = np.array([c.loop == "none" for c in library.clips], dtype=bool)

    def sample(self, clip_idx: np.ndarray, t: np.ndarray):
        """Pose/velocity at per-env times, envs grouped by assigned clip."""
        if len(self.library.clips) == 1:
            return sample_pose(self.ch, self.library.clips[0], t)
        pose = zero_pose(self.ch, t.shape)
        vel = zero_velocity(self.ch, t.shape)
        for c in np.unique(clip_idx):
            sel = clip_idx == c
            p, v = sample_pose(self.ch, self.library.clips[int(c)], t[sel])
            pose.root_pos[sel] = p.root_pos
            pose.root_rot[sel] = p.root_rot
            for k, rot in enumerate(p.joint_rot):
                if rot is not None:
                    pose.joint_rot[k][sel] = rot
            vel.root_lin_vel[sel] = v.root_lin_vel
            vel.root_ang_vel[sel] = v.root_ang_vel
            vel.dof_vel[sel] = v.dof_vel
        return pose, vel


def _gather_pose(pose: Pose, idx: np.ndarray) -> Pose:
    return Pose(
        pose.root_pos[idx],
        pose.root_rot[idx],
        [None if r is None else r[idx] for r in pose.joint_rot],
    )


def _gather_velocity(vel: PoseVelocity, idx: np.ndarray) -> PoseVelocity:
    return PoseVelocity(vel.root_lin_vel[idx], vel.root_ang_vel[idx], vel.dof_vel[idx])


class TrackingEnv(VectorEnv):
    """Synchronized imitation of a reference clip.

    Three flavors share the machinery:
      deepmimic    reward = hand-shaped tracking reward
      add          reward = 0 from the env; the agent derives it from the
                   per-step difference observation in info['disc_obs']
      view_motion  action-free playback; the engine state is overwritten
                   with the reference each step and reward = 0
    """

    def __init__(
        self,
        character: CharacterModel,
        num_envs: int,
        config: EnvConfig,
        library: MotionLibrary,
        seed: int = 0,
    ):
        super().__init__(character, num_envs, config, seed=seed)
        self.library = library
        self.clips = ClipSet(character, library)
        self.t_ref = np.zeros(num_envs, dtype=np.float64)
        self.clip_idx = np.zeros(num_envs, dtype=np.int64)
        self._cmd_ref = None  # reference sample the current step targets

    # -- dimensions -----------------------------------------------------------
    @property
    def obs_dim(self) -> int:
        # proprio + phase (cos, sin) + target dof delta + root pos/rot delta
        return proprio_dim(self.character) + 2 + self.character.dof_count + 6

    @property
    def disc_obs_dim(self) -> int:
        if self.config.task == "add":
            return add_difference_dim(self.character)
        return 0

    # -- resets ------------------------------------------------------------------
    def _reset_envs(self, env_indices: np.ndarray) -> None:
        n = env_indices.size
        self.clip_idx[env_indices] = [self.library.sample_clip(self.rng) for _ in range(n)]
        durations = self.clips.durations[self.clip_idx[env_indices]]
        if self.config.reset_mode == "default":
            # rest-pose starts (e.g. swing-up toward a held reference)
            self.t_ref[env_indices] = 0.0
            pose, vel = default_reset_state(
                self.character, n, self.rng, self.config.reset_noise
            )
        else:
            if self.config.use_rsi:
                self.t_ref[env_indices] = self.rng.uniform(0.0, durations)
            else:
                self.t_ref[env_indices] = 0.0
            pose, vel = self.clips.sample(self.clip_idx[env_indices], self.t_ref[env_indices])
        self.engine.write_state(env_indices, pose, vel)
        self._cmd_ref = None

    # -- stepping ----------------------------------------------------------------
    def _commands(self, actions: np.ndarray) -> np.ndarray:
        t_next = self.t_ref + self.control_dt
        ref_pose, ref_vel = self.clips.sample(self.clip_idx, t_next)
        self._cmd_ref = (ref_pose, ref_vel)
        mode = self.config.engine.control_mode
        scale = self.config.action_scale
        if self.config.task == "view_motion":
            return np.zeros((self.num_envs, self.action_dim))
        if mode in ("pos", "pd_1d"):
            return dof_from_pose(self.character, ref_pose) + scale * actions
        if mode == "vel":
            return ref_vel.dof_vel + scale * actions
        if mode == "torque":
            limits = np.array([j.torque_limit for j in self.character.joints])
            per_dof = np.repeat(limits, [j.dof for j in self.character.joints])
            return scale * actions * per_dof
        return np.zeros((self.num_envs, self.action_dim))

    def _post_step(self, state):
        ref_pose, ref_vel = self._cmd_ref
        if self.config.task == "view_motion":
            self.engine.write_state(np.arange(self.num_envs), ref_pose, ref_vel)
            state = self.engine.state()
        elif isinstance(self.engine, KinematicEngine):
            # the kinematic backend has no root dynamics; carry the root
            # along the reference trajectory
            self.engine.write_root(
                ref_pose.root_pos, ref_pose.root_rot, ref_vel.root_lin_vel, ref_vel.root_ang_vel
            )
            state = self.engine.state()
        self.t_ref = self.t_ref + self.control_dt
        return state

    def _reward(self, state) -> np.ndarray:
        if self.config.task != "deepmimic":
            return np.zeros(self.num_envs)
        ref_pose, ref_vel = self._cmd_ref
        r, _ = tracking_reward(
            self.character, state.pose, state.vel, ref_pose, ref_vel, self.config.reward
        )
        return r

    def _terminations(self, state):
        ref_pose, _ = self._cmd_ref
        fail = np.zeros(self.num_envs, dtype=bool)
        if self.config.task != "view_motion":
            fail = self._common_failures(state)
            pet = self.config.pose_error_termination
            if pet.enabled:
                fail |= instant_pose_error(self.character, state.pose, ref_pose) > pet.threshold
        succ = np.zeros(self.num_envs, dtype=bool)
        time = self._time_limit()
        clip_none = self.clips.loop_none[self.clip_idx]
        durations = self.clips.durations[self.clip_idx]
        if self.config.task == "view_motion":
            # playback runs the clip once regardless of loop mode
            time = time | (self.t_ref >= durations - 1e-9)
        else:
            time = time | (clip_none & (self.t_ref >= durations - 1e-9))
        return fail, succ, time

    def _observe(self, state) -> np.ndarray:
        durations = self.clips.durations[self.clip_idx]
        phase = np.mod(self.t_ref, durations) / durations
        next_pose, _ = self.clips.sample(self.clip_idx, self.t_ref + self.control_dt)
        dof = dof_from_pose(self.character, state.pose)
        target_dof = dof_from_pose(self.character, next_pose)
        rot_delta = quat_to_exp_map(
            quat_mul(next_pose.root_rot, quat_conjugate(state.pose.root_rot))
        )
        return np.concatenate(
            [
                proprio_features(self.character, state.pose, state.vel),
                np.cos(2 * np.pi * phase)[:, None],
                np.sin(2 * np.pi * phase)[:, None],
                target_dof - dof,
                next_pose.root_pos - state.pose.root_pos,
                rot_delta,
            ],
            axis=-1,
        )

    def _info(self, state) -> dict:
        ref_pose, ref_vel = self._cmd_ref
        info = {
            "pose_error": instant_pose_error(self.character, state.pose, ref_pose),
            "vel_error": instant_velocity_error(self.character, state.vel, ref_vel),
            "ref_time": self.t_ref.copy(),
        }
        if self.config.task == "add":
            info["disc_obs"] = add_difference_obs(
                self.character, state.pose, state.vel, ref_pose, ref_vel
            )
        return info

    def sample_disc_obs(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Discriminator positives: exact zeros (perfect tracking)."""
        if self.config.task != "add":
            raise ValueError(f"task {self.config.task!r} has no discriminator observations")
        return np.zeros((n, self.disc_obs_dim), dtype=np.float64)

    def _snapshot_extra(self) -> dict:
        return {"t_ref": self.t_ref.copy(), "clip_idx": self.clip_idx.copy()}

    def _restore_extra(self, extra: dict) -> None:
        self.t_ref = extra["t_ref"].copy()
        self.clip_idx = extra["clip_idx"].copy()
        self._cmd_ref = None


class AmpEnv(VectorEnv):
    """Unsynchronized style imitation.

    The env carries no reference clock; the policy is free to realize the
    motion style at any phase. Each step emits discriminator features for
    the latest state transition under info['disc_obs'], and reference
    transitions for discriminator training come from sample_disc_obs.
    """

    def __init__(
        self,
        character: CharacterModel,
        num_envs: int,
        config: EnvConfig,
        library: MotionLibrary,
        seed: int = 0,
    ):
        super().__init__(character, num_envs, config, seed=seed)
        self.library = library
        self.clips = ClipSet(character, library)
        self._prev_pose = zero_pose(character, (num_envs,))

    @property
    def obs_dim(self) -> int:
        return proprio_dim(self.character)

    @property
    def disc_obs_dim(self) -> int:
        return amp_observation_dim(self.character)

    def _reset_envs(self, env_indices: np.ndarray) -> None:
        if self.config.reset_mode == "default":
            pose, vel = default_reset_state(
                self.character, env_indices.size, self.rng, self.config.reset_noise
            )
        else:
            clip_idx = np.asarray(
                [self.library.sample_clip(self.rng) for _ in env_indices.tolist()]
            )
            if self.config.use_rsi:
                t0 = self.rng.uniform(0.0, self.clips.durations[clip_idx])
            else:
                t0 = np.zeros(env_indices.size)
            pose, vel = self.clips.sample(clip_idx, t0)
        self.engine.write_state(env_indices, pose, vel)
        self._store_prev(env_indices, pose)

    def _store_prev(self, env_indices: np.ndarray, pose: Pose) -> None:
        self._prev_pose.root_pos[env_indices] = pose.root_pos
        self._prev_pose.root_rot[env_indices] = pose.root_rot
        for k, rot in enumerate(pose.joint_rot):
            if rot is not None:
                self._prev_pose.joint_rot[k][env_indices] = rot

    def _commands(self, actions: np.ndarray) -> np.ndarray:
        mode = self.config.engine.control_mode
        scale = self.config.action_scale
        if mode in ("pos", "pd_1d", "vel"):
            return scale * actions
        if mode == "torque":
            limits = np.array([j.torque_limit for j in self.character.joints])
            per_dof = np.repeat(limits, [j.dof for j in self.character.joints])
            return scale * actions * per_dof
        return np.zeros((self.num_envs, self.action_dim))

    def _reward(self, state) -> np.ndarray:
        return np.zeros(self.num_envs)

    def _terminations(self, state):
        fail = self._common_failures(state)
        succ = np.zeros(self.num_envs, dtype=bool)
        return fail, succ, self._time_limit()

    def _observe(self, state) -> np.ndarray:
        return proprio_features(self.character, state.pose, state.vel)

    def _info(self, state) -> dict:
        disc = amp_observation_pair(self.character, self._prev_pose, state.pose, self.control_dt)
        self._store_prev(np.arange(self.num_envs), state.pose)
        return {"disc_obs": disc}

    def sample_disc_obs(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Reference transitions: consecutive clip poses dt apart."""
        clip_idx = np.asarray([self.library.sample_clip(rng) for _ in range(n)])
        durations = self.clips.durations[clip_idx]
        loop_none = self.clips.loop_none[clip_idx]
        hi = np.where(loop_none, np.maximum(durations - self.control_dt, 0.0), durations)
        t0 = rng.uniform(0.0, hi)
        p0, _ = self.clips.sample(clip_idx, t0)
        p1, _ = self.clips.sample(clip_idx, t0 + self.control_dt)
        return amp_observation_pair(self.character, p0, p1, self.control_dt)

    def _snapshot_extra(self) -> dict:
        return {
            "prev_root_pos": self._prev_pose.root_pos.copy(),
            "prev_root_rot": self._prev_pose.root_rot.copy(),
            "prev_joint_rot": [
                None if r is None else r.copy() for r in self._prev_pose.joint_rot
            ],
        }

    def _restore_extra(self, extra: dict) -> None:
        self._prev_pose.root_pos[:] = extra["prev_root_pos"]
        self._prev_pose.root_rot[:] = extra["prev_root_rot"]
        for k, rot in enumerate(extra["prev_joint_rot"]):
            if rot is not None:
                self._prev_pose.joint_rot[k][:] = rot
