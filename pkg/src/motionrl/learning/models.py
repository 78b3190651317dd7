"""Neural network models: Gaussian policy, value function, discriminator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import torch
import torch.nn as nn

_ACTIVATIONS = {"relu": nn.ReLU, "tanh": nn.Tanh, "elu": nn.ELU}

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class ModelConfig:
    """Network architecture shared by the policy, value, and discriminator heads."""

    hidden_sizes: tuple[int, ...] = (256, 128)
    activation: str = "relu"
    log_std_init: float = math.log(0.2)

    def __post_init__(self):
        self.hidden_sizes = tuple(int(h) for h in self.hidden_sizes)
        if self.activation not in _ACTIVATIONS:
            raise ValueError(
                f"unknown activation {self.activation!r}; expected one of "
                f"{sorted(_ACTIVATIONS)}"
            )

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        known = {"hidden_sizes", "activation", "log_std_init"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**data)


def mlp(in_dim: int, hidden: tuple[int, ...], out_dim: int, activation: str,
        dtype: torch.dtype) -> nn.Sequential:
    act = _ACTIVATIONS[activation]
    layers: list[nn.Module] = []
    prev = in_dim
    for h in hidden:
        layers.append(nn.Linear(prev, h, dtype=dtype))
        layers.append(act())
        prev = h
    layers.append(nn.Linear(prev, out_dim, dtype=dtype))
    return nn.Sequential(*layers)


class GaussianPolicy(nn.Module):
    """Diagonal Gaussian policy: MLP mean, state-independent learnable log-std."""

    def __init__(self, obs_dim: int, action_dim: int, config: ModelConfig,
                 dtype: torch.dtype = torch.float32):
        super().__init__()
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        self.net = mlp(obs_dim, config.hidden_sizes, action_dim, config.activation, dtype)
        final = self.net[-1]
        with torch.no_grad():
            final.weight.mul_(0.01)
            final.bias.zero_()
        self.log_std = nn.Parameter(
            torch.full((action_dim,), config.log_std_init, dtype=dtype)
        )

    def forward(self, obs: torch.Tensor) -> torch.Tensor:
        return self.net(obs)

    def log_prob(self, obs: torch.Tensor, actions: torch.Tensor) -> torch.Tensor:
        mean = self.net(obs)
        z = (actions - mean) * torch.exp(-self.log_std)
        per_dim = -0.5 * z.square() - self.log_std - 0.5 * _LOG_2PI
        return per_dim.sum(dim=-1)

    def entropy(self) -> torch.Tensor:
        return (self.log_std + 0.5 * (_LOG_2PI + 1.0)).sum()

    @torch.no_grad()
    def act(self, obs: torch.Tensor, generator: torch.Generator | None = None,
            deterministic: bool = False) -> tuple[torch.Tensor, torch.Tensor]:
        """Sample actions (or take the mean) and return (actions, log-probs)."""
        mean = self.net(obs)
        if deterministic:
            actions = mean
        else:
            noise = torch.empty_like(mean).normal_(generator=generator)
            actions = mean + noise * torch.exp(self.log_std)
        z = (actions - mean) * torch.exp(-self.log_std)
        per_dim = -0.5 * z.square() - self.log_std - 0.5 * _LOG_2PI
        return actions, per_dim.sum(dim=-1)


class ValueFunction(nn.Module):
    def __init__(self, obs_dim: int, config: ModelConfig,
                 dtype: torch.dtype = torch.float32):
        super().__init__()
        self.net = mlp(obs_dim, config.hidden_sizes, 1, config.activation, dtype)

    def forward(self, obs: torch.Tensor) -> torch.Tensor:
        return self.net(obs).squeeze(-1)


class Discriminator(nn.Module):
    def __init__(self, in_dim: int, config: ModelConfig,
                 dtype: torch.dtype = torch.float32):
        super().__init__()
        self.net = mlp(in_dim, config.hidden_sizes, 1, config.activation, dtype)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x).squeeze(-1)


class ActorCritic(nn.Module):
    """Container bundling the policy and value heads, plus an optional discriminator."""

    def __init__(self, obs_dim: int, action_dim: int, config: ModelConfig,
                 disc_obs_dim: int = 0, dtype: torch.dtype = torch.float32):
        super().__init__()
        self.config = config
        self.policy = GaussianPolicy(obs_dim, action_dim, config, dtype=dtype)
        self.value = ValueFunction(obs_dim, config, dtype=dtype)
        self.discriminator = (
            Discriminator(disc_obs_dim, config, dtype=dtype) if disc_obs_dim else None
        )

    def architecture(self) -> dict:
        desc = {
            "obs_dim": self.policy.obs_dim,
            "action_dim": self.policy.action_dim,
            "hidden_sizes": list(self.config.hidden_sizes),
            "activation": self.config.activation,
            "disc_obs_dim": (
                self.discriminator.net[0].in_features if self.discriminator else 0
            ),
        }
        return desc


def flat_parameters(module: nn.Module) -> torch.Tensor:
    """Concatenate all parameters into one vector; layout follows parameters()."""
    return torch.cat([p.detach().reshape(-1) for p in module.parameters()])


def set_flat_parameters(module: nn.Module, vec: torch.Tensor) -> None:
    offset = 0
    with torch.no_grad():
        for p in module.parameters():
            n = p.numel()
            p.copy_(vec[offset:offset + n].view_as(p))
            offset += n
    if offset != vec.numel():
        raise ValueError(f"parameter vector has {vec.numel()} entries, model needs {offset}")


def flat_gradients(module: nn.Module) -> torch.Tensor:
    """Gradient vector in the same layout as flat_parameters."""
    chunks = []
    for p in module.parameters():
        if p.grad is None:
            chunks.append(torch.zeros(p.numel(), dtype=p.dtype))
        else:
            chunks.append(p.grad.detach().reshape(-1))
    return torch.cat(chunks)
