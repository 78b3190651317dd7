"""Rollout and replay storage."""

from __future__ import annotations

import numpy as np


class ExperienceBuffer:
    """Fixed-size on-policy rollout store, laid out as (steps, envs, dim).

    ``next_values`` holds the critic's estimate of the observation returned by
    each step, which is the bootstrap value wherever an episode hits its time
    limit or the rollout window ends mid-episode.
    """

    def __init__(self, steps_per_env: int, num_envs: int, obs_dim: int,
                 action_dim: int, disc_obs_dim: int = 0):
        self.steps_per_env = steps_per_env
        self.num_envs = num_envs
        T, E = steps_per_env, num_envs
        self.obs = np.zeros((T, E, obs_dim), dtype=np.float64)
        self.actions = np.zeros((T, E, action_dim), dtype=np.float64)
        self.logprobs = np.zeros((T, E), dtype=np.float64)
        self.values = np.zeros((T, E), dtype=np.float64)
        self.rewards = np.zeros((T, E), dtype=np.float64)
        self.dones = np.zeros((T, E), dtype=np.int64)
        self.next_values = np.zeros((T, E), dtype=np.float64)
        self.disc_obs = (
            np.zeros((T, E, disc_obs_dim), dtype=np.float64) if disc_obs_dim else None
        )
        self.t = 0

    @property
    def full(self) -> bool:
        return self.t >= self.steps_per_env

    @property
    def size(self) -> int:
        return self.t * self.num_envs

    def add(self, obs, actions, logprobs, values, rewards, dones, next_values,
            disc_obs=None) -> None:
        if self.full:
            raise RuntimeError("experience buffer is full")
        t = self.t
        self.obs[t] = obs
        self.actions[t] = actions
        self.logprobs[t] = logprobs
        self.values[t] = values
        self.rewards[t] = rewards
        self.dones[t] = dones
        self.next_values[t] = next_values
        if self.disc_obs is not None:
            if disc_obs is None:
                raise ValueError("buffer expects disc_obs rows")
            self.disc_obs[t] = disc_obs
        self.t += 1

    def clear(self) -> None:
        self.t = 0


class RingBuffer:
    """Flat replay ring over named row groups of fixed widths."""

    def __init__(self, capacity: int, fields: dict[str, int]):
        self.capacity = capacity
        self.arrays = {
            name: np.zeros((capacity, dim), dtype=np.float64)
            for name, dim in fields.items()
        }
        self.pos = 0
        self.count = 0

    def __len__(self) -> int:
        return self.count

    def add(self, **rows: np.ndarray) -> None:
        if set(rows) != set(self.arrays):
            raise ValueError(f"expected fields {sorted(self.arrays)}, got {sorted(rows)}")
        n = next(iter(rows.values())).shape[0]
        idx = (self.pos + np.arange(n)) % self.capacity
        for name, arr in self.arrays.items():
            data = np.asarray(rows[name], dtype=np.float64).reshape(n, -1)
            arr[idx] = data
        self.pos = int((self.pos + n) % self.capacity)
        self.count = int(min(self.count + n, self.capacity))

    def sample(self, n: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
        if self.count == 0:
            raise RuntimeError("cannot sample from an empty replay buffer")
        idx = rng.integers(0, self.count, size=n)
        return {name: arr[idx] for name, arr in self.arrays.items()}

    def state(self) -> dict:
        return {
            "arrays": {k: v.copy() for k, v in self.arrays.items()},
            "pos": self.pos,
            "count": self.count,
        }

    def load_state(self, state: dict) -> None:
        for k, v in state["arrays"].items():
            self.arrays[k][:] = v
        self.pos = int(state["pos"])
        self.count = int(state["count"])
