"""Agents: rollout collection, return estimation, and parameter updates.

An agent owns the model, normalizers, optimizers, and rollout buffer for one
environment batch.  All reductions that must agree across distributed workers
(gradient averages, normalizer moments, advantage statistics) go through a
``comm`` object; the default SoloComm is the identity, and worker groups
substitute a synchronized implementation with a fixed reduction order.
"""

from __future__ import annotations

import copy
from collections import deque

import numpy as np
import torch

from ..envs import DoneFlag, VectorEnv
from .buffer import ExperienceBuffer, RingBuffer
from .config import AgentConfig
from .gae import compute_returns_advantages
from .losses import (
    awr_policy_loss,
    awr_weights,
    discriminator_loss,
    ppo_policy_loss,
    style_reward,
    value_loss,
)
from .models import ActorCritic
from .normalizer import RunningNormalizer

CHECKPOINT_VERSION = 1


class TrainingDivergedError(RuntimeError):
    """Raised when an update produces a non-finite loss."""

    def __init__(self, message: str, stats: dict | None = None):
        super().__init__(message)
        self.stats = stats or {}


class CheckpointError(ValueError):
    """Checkpoint payload is missing, stale, or built for another model."""


class SoloComm:
    """Identity reductions for single-process training."""

    def moments(self, count, mean, m2):
        return count, mean, m2

    def scalar_sums(self, values: np.ndarray) -> np.ndarray:
        return values

    def average_gradients(self, params) -> None:
        pass


class Agent:
    """Base agent: collection loop, normalization, checkpoint state."""

    def __init__(self, env: VectorEnv, config: AgentConfig, seed: int = 0):
        self.env = env
        self.config = config
        self.np_rng = np.random.default_rng(seed)
        self.torch_gen = torch.Generator()
        self.torch_gen.manual_seed(int(seed))
        self.model = ActorCritic(
            env.obs_dim, env.action_dim, config.model, disc_obs_dim=self._disc_dim()
        )
        self.obs_normalizer = RunningNormalizer(env.obs_dim)
        self.buffer = ExperienceBuffer(
            config.steps_per_env, env.num_envs, env.obs_dim, env.action_dim,
            disc_obs_dim=self._disc_dim(),
        )
        self.comm = SoloComm()
        self.iteration = 0
        self.total_samples = 0
        self._obs = env.reset()
        self._ep_return = np.zeros(env.num_envs, dtype=np.float64)
        self._ep_len = np.zeros(env.num_envs, dtype=np.int64)
        self._recent_returns: deque = deque(maxlen=100)
        self._recent_lengths: deque = deque(maxlen=100)
        self._optimizers = self._build_optimizers()

    # -- construction hooks ------------------------------------------------------
    def _disc_dim(self) -> int:
        return 0

    def _build_optimizers(self) -> dict[str, torch.optim.Adam]:
        return {
            "policy": torch.optim.Adam(
                self.model.policy.parameters(), lr=self.config.policy_lr
            ),
            "value": torch.optim.Adam(
                self.model.value.parameters(), lr=self.config.value_lr
            ),
        }

    # -- observation plumbing ----------------------------------------------------
    def _obs_tensor(self, obs: np.ndarray) -> torch.Tensor:
        if self.config.normalize_obs:
            obs = self.obs_normalizer.normalize(obs)
        return torch.as_tensor(np.asarray(obs), dtype=torch.float32)

    def act(self, obs: np.ndarray, deterministic: bool = True) -> np.ndarray:
        obs_t = self._obs_tensor(obs)
        actions, _ = self.model.policy.act(
            obs_t, generator=self.torch_gen, deterministic=deterministic
        )
        return actions.numpy().astype(np.float64)

    # -- rollout collection --------------------------------------------------------
    def collect(self) -> dict:
        cfg = self.config
        buf = self.buffer
        buf.clear()
        info_sums: dict[str, float] = {}
        reward_sum = 0.0
        completed = 0
        for _ in range(cfg.steps_per_env):
            obs = self._obs
            obs_t = self._obs_tensor(obs)
            with torch.no_grad():
                actions_t, logp_t = self.model.policy.act(obs_t, generator=self.torch_gen)
                values_t = self.model.value(obs_t)
            actions = actions_t.numpy().astype(np.float64)
            result = self.env.step(actions)
            with torch.no_grad():
                next_v = self.model.value(self._obs_tensor(result.obs)).numpy()
            buf.add(
                obs, actions, logp_t.numpy(), values_t.numpy(), result.reward,
                result.done, next_v, disc_obs=result.info.get("disc_obs"),
            )
            self._ep_return += result.reward
            self._ep_len += 1
            done_mask = result.done != int(DoneFlag.NULL)
            if np.any(done_mask):
                for e in np.flatnonzero(done_mask):
                    self._recent_returns.append(float(self._ep_return[e]))
                    self._recent_lengths.append(int(self._ep_len[e]))
                completed += int(done_mask.sum())
                self._ep_return[done_mask] = 0.0
                self._ep_len[done_mask] = 0
            for k, v in result.info.items():
                if k in ("disc_obs", "ref_time"):
                    continue
                v = np.asarray(v)
                if v.ndim == 1 and v.dtype.kind == "f":
                    info_sums[k] = info_sums.get(k, 0.0) + float(v.sum())
            reward_sum += float(result.reward.sum())
            self._obs = result.obs
        n = buf.size
        self.total_samples += n
        stats = {
            "mean_return": float(np.mean(self._recent_returns)) if self._recent_returns else 0.0,
            "mean_ep_len": float(np.mean(self._recent_lengths)) if self._recent_lengths else 0.0,
            "episodes": float(completed),
            "mean_step_reward": reward_sum / n,
        }
        for k in sorted(info_sums):
            stats[k] = info_sums[k] / n
        return stats

    def train_iteration(self) -> dict:
        stats = self.collect()
        stats.update(self.update())
        self.iteration += 1
        return stats

    def update(self) -> dict:
        raise NotImplementedError

    # -- shared update pieces ------------------------------------------------------
    def _normalized_advantages(self, advantages: np.ndarray) -> np.ndarray:
        flat = advantages.reshape(-1)
        sums = self.comm.scalar_sums(
            np.array([flat.size, flat.sum(), np.square(flat).sum()], dtype=np.float64)
        )
        mean = sums[1] / sums[0]
        var = max(sums[2] / sums[0] - mean**2, 0.0)
        return (advantages - mean) / (np.sqrt(var) + 1e-8)

    def _update_normalizer(self, normalizer: RunningNormalizer, batch: np.ndarray) -> None:
        count, mean, m2 = RunningNormalizer.batch_moments(batch)
        normalizer.merge_moments(*self.comm.moments(count, mean, m2))

    def _check_finite(self, losses: dict[str, torch.Tensor]) -> None:
        for name, loss in losses.items():
            if not torch.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite {name} at iteration {self.iteration}",
                    stats={k: float(v.detach()) for k, v in losses.items()},
                )

    # -- checkpointing ---------------------------------------------------------------
    def state(self) -> dict:
        payload = {
            "version": CHECKPOINT_VERSION,
            "agent_type": self.config.agent,
            "architecture": self.model.architecture(),
            "iteration": self.iteration,
            "total_samples": self.total_samples,
            # state_dict() returns live references; clone so the payload is a
            # true snapshot that later training steps cannot mutate
            "model": copy.deepcopy(self.model.state_dict()),
            "optimizers": {k: copy.deepcopy(v.state_dict()) for k, v in self._optimizers.items()},
            "normalizers": {"obs": self.obs_normalizer.state()},
            "rng": {
                "numpy": copy.deepcopy(self.np_rng.bit_generator.state),
                "torch": self.torch_gen.get_state(),
            },
            "env": self.env.snapshot(),
            "last_obs": self._obs.copy(),
            "episode_stats": {
                "returns": list(self._recent_returns),
                "lengths": list(self._recent_lengths),
                "ep_return": self._ep_return.copy(),
                "ep_len": self._ep_len.copy(),
            },
        }
        self._state_extra(payload)
        return payload

    def _state_extra(self, payload: dict) -> None:
        pass

    def load_state(self, payload: dict, resume: bool = True) -> None:
        """Restore from a checkpoint payload.

        With resume=True the full training state (optimizers, rng, env,
        replay) comes back; with resume=False only the model and normalizers
        load, which is what evaluation needs.
        """
        if payload.get("version") != CHECKPOINT_VERSION:
            raise CheckpointError(
                f"checkpoint version {payload.get('version')} != {CHECKPOINT_VERSION}"
            )
        if payload.get("agent_type") != self.config.agent:
            raise CheckpointError(
                f"checkpoint was trained with agent {payload.get('agent_type')!r}, "
                f"config requests {self.config.agent!r}"
            )
        arch = self.model.architecture()
        if payload.get("architecture") != arch:
            raise CheckpointError(
                f"model architecture mismatch: checkpoint {payload.get('architecture')} "
                f"vs configured {arch}"
            )
        self.model.load_state_dict(payload["model"])
        self.obs_normalizer.load_state(payload["normalizers"]["obs"])
        self._load_extra(payload, resume)
        if not resume:
            return
        self.iteration = int(payload["iteration"])
        self.total_samples = int(payload["total_samples"])
        for k, opt in self._optimizers.items():
            # torch adopts moment tensors by reference, so hand it a copy;
            # otherwise agents loaded from one payload share optimizer state
            opt.load_state_dict(copy.deepcopy(payload["optimizers"][k]))
        self.np_rng.bit_generator.state = copy.deepcopy(payload["rng"]["numpy"])
        self.torch_gen.set_state(payload["rng"]["torch"])
        self.env.restore(payload["env"])
        self._obs = payload["last_obs"].copy()
        ep = payload["episode_stats"]
        self._recent_returns = deque(ep["returns"], maxlen=100)
        self._recent_lengths = deque(ep["lengths"], maxlen=100)
        self._ep_return = ep["ep_return"].copy()
        self._ep_len = ep["ep_len"].copy()

    def _load_extra(self, payload: dict, resume: bool) -> None:
        pass


class PPOAgent(Agent):
    """On-policy clipped-surrogate updates over fresh rollouts."""

    def update(self) -> dict:
        cfg = self.config
        buf = self.buffer
        pre_stats = self._pre_gae()
        returns, advantages = compute_returns_advantages(
            buf.rewards, buf.values, buf.dones, buf.next_values,
            cfg.discount, cfg.gae_lambda, cfg.terminal_penalty, cfg.terminal_bonus,
        )
        if cfg.normalize_advantages:
            advantages = self._normalized_advantages(advantages)
        N = buf.size
        obs = buf.obs[: buf.t].reshape(N, -1)
        obs_t = self._obs_tensor(obs)
        act_t = torch.as_tensor(buf.actions[: buf.t].reshape(N, -1), dtype=torch.float32)
        logp_t = torch.as_tensor(buf.logprobs[: buf.t].reshape(N), dtype=torch.float32)
        adv_t = torch.as_tensor(advantages.reshape(N), dtype=torch.float32)
        ret_t = torch.as_tensor(returns.reshape(N), dtype=torch.float32)

        sums = {"policy_loss": 0.0, "value_loss": 0.0, "clip_fraction": 0.0, "kl": 0.0}
        steps = 0
        for _ in range(cfg.epochs):
            perm = self.np_rng.permutation(N)
            for chunk in np.array_split(perm, cfg.minibatches):
                idx = torch.as_tensor(chunk)
                p_loss, p_stats = ppo_policy_loss(
                    self.model.policy, obs_t[idx], act_t[idx], logp_t[idx],
                    adv_t[idx], cfg.clip_epsilon,
                )
                entropy = self.model.policy.entropy()
                total = p_loss - cfg.entropy_coef * entropy
                v_loss = value_loss(self.model.value, obs_t[idx], ret_t[idx])
                self._check_finite({"policy_loss": total, "value_loss": v_loss})
                self._optimizers["policy"].zero_grad()
                self._optimizers["value"].zero_grad()
                total.backward()
                v_loss.backward()
                self.comm.average_gradients(list(self.model.parameters()))
                self._optimizers["policy"].step()
                self._optimizers["value"].step()
                sums["policy_loss"] += float(p_loss.detach())
                sums["value_loss"] += float(v_loss.detach())
                sums["clip_fraction"] += p_stats["clip_fraction"]
                sums["kl"] += p_stats["kl"]
                steps += 1
        if cfg.normalize_obs:
            self._update_normalizer(self.obs_normalizer, obs)
        buf.clear()
        stats = {k: v / steps for k, v in sums.items()}
        stats["entropy"] = float(self.model.policy.entropy().detach())
        stats.update(pre_stats)
        return stats

    def _pre_gae(self) -> dict:
        """Hook between collection and return estimation (reward relabeling)."""
        return {}


class AWRAgent(Agent):
    """Replay-based advantage-weighted regression."""

    def __init__(self, env: VectorEnv, config: AgentConfig, seed: int = 0):
        super().__init__(env, config, seed=seed)
        self.replay = RingBuffer(
            config.awr.replay_size,
            {"obs": env.obs_dim, "actions": env.action_dim, "returns": 1},
        )

    def update(self) -> dict:
        cfg = self.config
        buf = self.buffer
        returns, _ = compute_returns_advantages(
            buf.rewards, buf.values, buf.dones, buf.next_values,
            cfg.discount, cfg.gae_lambda, cfg.terminal_penalty, cfg.terminal_bonus,
        )
        N = buf.size
        obs = buf.obs[: buf.t].reshape(N, -1)
        self.replay.add(
            obs=obs,
            actions=buf.actions[: buf.t].reshape(N, -1),
            returns=returns.reshape(N, 1),
        )
        sums = {"policy_loss": 0.0, "value_loss": 0.0, "mean_weight": 0.0}
        steps = cfg.epochs * cfg.minibatches
        for _ in range(steps):
            batch = self.replay.sample(cfg.awr.batch_size, self.np_rng)
            obs_t = self._obs_tensor(batch["obs"])
            act_t = torch.as_tensor(batch["actions"], dtype=torch.float32)
            ret_t = torch.as_tensor(batch["returns"][:, 0], dtype=torch.float32)
            with torch.no_grad():
                adv = ret_t - self.model.value(obs_t)
            weights = awr_weights(adv, cfg.awr.beta, cfg.awr.weight_max)
            p_loss = awr_policy_loss(self.model.policy, obs_t, act_t, weights)
            v_loss = value_loss(self.model.value, obs_t, ret_t)
            self._check_finite({"policy_loss": p_loss, "value_loss": v_loss})
            self._optimizers["policy"].zero_grad()
            self._optimizers["value"].zero_grad()
            p_loss.backward()
            v_loss.backward()
            self.comm.average_gradients(list(self.model.parameters()))
            self._optimizers["policy"].step()
            self._optimizers["value"].step()
            sums["policy_loss"] += float(p_loss.detach())
            sums["value_loss"] += float(v_loss.detach())
            sums["mean_weight"] += float(weights.mean())
        if cfg.normalize_obs:
            self._update_normalizer(self.obs_normalizer, obs)
        buf.clear()
        return {k: v / steps for k, v in sums.items()}

    def _state_extra(self, payload: dict) -> None:
        payload["replay"] = self.replay.state()

    def _load_extra(self, payload: dict, resume: bool) -> None:
        if resume:
            self.replay.load_state(payload["replay"])


class AMPAgent(PPOAgent):
    """PPO plus an adversarial style reward from a transition discriminator."""

    def __init__(self, env: VectorEnv, config: AgentConfig, seed: int = 0):
        if env.disc_obs_dim == 0:
            raise ValueError(
                f"{config.agent} agent requires an env with discriminator "
                f"observations; {type(env).__name__} has none"
            )
        super().__init__(env, config, seed=seed)
        self.disc_normalizer = RunningNormalizer(env.disc_obs_dim)
        self.disc_replay = RingBuffer(
            config.disc.replay_size, {"disc_obs": env.disc_obs_dim}
        )
        self._optimizers["disc"] = torch.optim.Adam(
            self.model.discriminator.parameters(), lr=config.disc.lr
        )

    def _disc_dim(self) -> int:
        return self.env.disc_obs_dim

    def _disc_tensor(self, rows: np.ndarray) -> torch.Tensor:
        return torch.as_tensor(
            self.disc_normalizer.normalize(rows), dtype=torch.float32
        )

    def update_discriminator(self, real: np.ndarray, fake: np.ndarray) -> dict:
        """One least-squares discriminator step on (reference, policy) batches."""
        loss, stats = discriminator_loss(
            self.model.discriminator,
            self._disc_tensor(real),
            self._disc_tensor(fake),
            self.config.disc.grad_penalty,
        )
        self._check_finite({"disc_loss": loss})
        self._optimizers["disc"].zero_grad()
        loss.backward()
        self.comm.average_gradients(list(self.model.parameters()))
        self._optimizers["disc"].step()
        stats["disc_loss"] = float(loss.detach())
        return stats

    def _pre_gae(self) -> dict:
        cfg = self.config
        buf = self.buffer
        rows = buf.disc_obs[: buf.t].reshape(buf.size, -1)
        self.disc_replay.add(disc_obs=rows)
        sums = {"disc_loss": 0.0, "disc_real_mean": 0.0, "disc_fake_mean": 0.0,
                "disc_grad_penalty": 0.0}
        reals = []
        for _ in range(cfg.disc.steps):
            real = self.env.sample_disc_obs(cfg.disc.batch_size, self.np_rng)
            fake = self.disc_replay.sample(cfg.disc.batch_size, self.np_rng)["disc_obs"]
            stats = self.update_discriminator(real, fake)
            reals.append(real)
            for k in sums:
                sums[k] += stats[k]
        with torch.no_grad():
            d = self.model.discriminator(self._disc_tensor(rows))
            style = style_reward(d).numpy().reshape(buf.t, buf.num_envs)
        buf.rewards[: buf.t] = (
            cfg.disc.task_weight * buf.rewards[: buf.t] + cfg.disc.style_weight * style
        )
        if cfg.normalize_obs:
            self._update_normalizer(
                self.disc_normalizer, np.concatenate([rows] + reals, axis=0)
            )
        stats = {k: v / max(cfg.disc.steps, 1) for k, v in sums.items()}
        stats["style_reward_mean"] = float(style.mean())
        return stats

    def style_rewards(self, disc_obs: np.ndarray) -> np.ndarray:
        with torch.no_grad():
            d = self.model.discriminator(self._disc_tensor(disc_obs))
            return style_reward(d).numpy().astype(np.float64)

    def _state_extra(self, payload: dict) -> None:
        payload["normalizers"]["disc"] = self.disc_normalizer.state()
        payload["replay"] = self.disc_replay.state()

    def _load_extra(self, payload: dict, resume: bool) -> None:
        self.disc_normalizer.load_state(payload["normalizers"]["disc"])
        if resume:
            self.disc_replay.load_state(payload["replay"])


class ADDAgent(AMPAgent):
    """AMP machinery over per-step tracking-difference observations; the
    reference batch is all zeros (perfect tracking)."""


AGENT_CLASSES = {"ppo": PPOAgent, "awr": AWRAgent, "amp": AMPAgent, "add": ADDAgent}


def build_agent(env: VectorEnv, config: AgentConfig, seed: int = 0) -> Agent:
    return AGENT_CLASSES[config.agent](env, config, seed=seed)
