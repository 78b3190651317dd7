"""Goal-reaching task: drive the root to a sampled horizontal location."""

from __future__ import annotations

import numpy as np

from ..character import CharacterModel
from ..rotations import horizontal_indices
from .base import EnvConfig, VectorEnv, default_reset_state
from .features import goal_in_local_frame, proprio_dim, proprio_features


class TargetLocationEnv(VectorEnv):
    """Reward exp(-0.5 d^2) on the horizontal distance d to a goal; done is
    SUCC after holding within succ_radius for dwell_time seconds."""

    def __init__(
        self,
        character: CharacterModel,
        num_envs: int,
        config: EnvConfig,
        seed: int = 0,
    ):
        super().__init__(character, num_envs, config, seed=seed)
        self.goals = np.zeros((num_envs, 2), dtype=np.float64)
        self.dwell = np.zeros(num_envs, dtype=np.int64)
        self.dwell_steps = max(1, int(round(config.target.dwell_time * config.engine.control_freq)))

    @property
    def obs_dim(self) -> int:
        return proprio_dim(self.character) + 2

    def _reset_envs(self, env_indices: np.ndarray) -> None:
        n = env_indices.size
        pose, vel = default_reset_state(self.character, n, self.rng, self.config.reset_noise)
        self.engine.write_state(env_indices, pose, vel)
        r = self.config.target.goal_range
        goals = self.rng.uniform(-r, r, size=(n, 2))
        if self.character.up_axis == "y":
            # planar characters move in the x-y plane; the second horizontal
            # axis (z) is unreachable, so goals live on the x line
            goals[:, 1] = 0.0
        self.goals[env_indices] = goals
        self.dwell[env_indices] = 0

    def _commands(self, actions: np.ndarray) -> np.ndarray:
        mode = self.config.engine.control_mode
        scale = self.config.action_scale
        if mode == "torque":
            limits = np.array([j.torque_limit for j in self.character.joints])
            per_dof = np.repeat(limits, [j.dof for j in self.character.joints])
            return scale * actions * per_dof
        return scale * actions

    def _distance(self, state) -> np.ndarray:
        h = horizontal_indices(self.character.up_axis)
        root = np.stack(
            [state.pose.root_pos[:, h[0]], state.pose.root_pos[:, h[1]]], axis=-1
        )
        return np.linalg.norm(root - self.goals, axis=-1)

    def _reward(self, state) -> np.ndarray:
        d = self._distance(state)
        return np.exp(-0.5 * d**2)

    def _terminations(self, state):
        fail = self._common_failures(state)
        d = self._distance(state)
        inside = d < self.config.target.succ_radius
        self.dwell = np.where(inside, self.dwell + 1, 0)
        succ = self.dwell >= self.dwell_steps
        return fail, succ, self._time_limit()

    def _observe(self, state) -> np.ndarray:
        local = goal_in_local_frame(self.character, state.pose, self.goals)
        return np.concatenate(
            [proprio_features(self.character, state.pose, state.vel), local], axis=-1
        )

    def _info(self, state) -> dict:
        return {"goal_distance": self._distance(state)}

    def _snapshot_extra(self) -> dict:
        return {"goals": self.goals.copy(), "dwell": self.dwell.copy()}

    def _restore_extra(self, extra: dict) -> None:
        self.goals[:] = extra["goals"]
        self.dwell[:] = extra["dwell"]
