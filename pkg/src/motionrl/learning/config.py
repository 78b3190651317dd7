"""Agent configuration loading and validation."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .models import ModelConfig

AGENTS = ("ppo", "awr", "amp", "add")


_SCALARS = {"float": float, "int": int}


def _coerce_scalars(obj) -> None:
    """Cast declared int/float fields; YAML reads 1e30 without a dot as a string."""
    for f in fields(obj):
        kind = _SCALARS.get(f.type)
        value = getattr(obj, f.name)
        if kind is None or isinstance(value, bool):
            continue
        try:
            setattr(obj, f.name, kind(value))
        except (TypeError, ValueError):
            raise ValueError(f"{f.name} must be a number, got {value!r}") from None


@dataclass
class AwrConfig:
    beta: float = 1.0
    weight_max: float = 20.0
    replay_size: int = 100_000
    batch_size: int = 256

    def __post_init__(self):
        _coerce_scalars(self)

    @classmethod
    def from_dict(cls, data: dict) -> "AwrConfig":
        return _from_dict(cls, data, "awr")


@dataclass
class DiscConfig:
    lr: float = 1e-3
    batch_size: int = 256
    replay_size: int = 100_000
    steps: int = 16
    grad_penalty: float = 5.0
    style_weight: float = 1.0
    task_weight: float = 0.0

    def __post_init__(self):
        _coerce_scalars(self)

    @classmethod
    def from_dict(cls, data: dict) -> "DiscConfig":
        return _from_dict(cls, data, "disc")


def _from_dict(cls, data: dict, section: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown {section} config keys: {sorted(unknown)}")
    return cls(**data)


@dataclass
class AgentConfig:
    """Hyperparameters for one agent; sections beyond the active type are ignored."""

    agent: str = "ppo"
    discount: float = 0.99
    gae_lambda: float = 0.95
    clip_epsilon: float = 0.2
    policy_lr: float = 3e-4
    value_lr: float = 1e-3
    epochs: int = 4
    minibatches: int = 4
    steps_per_env: int = 32
    normalize_obs: bool = True
    normalize_advantages: bool = True
    entropy_coef: float = 0.0
    terminal_penalty: float = 0.0
    terminal_bonus: float = 0.0
    max_iterations: int = 1000
    test_episodes: int = 16
    model: ModelConfig = field(default_factory=ModelConfig)
    awr: AwrConfig = field(default_factory=AwrConfig)
    disc: DiscConfig = field(default_factory=DiscConfig)

    def __post_init__(self):
        _coerce_scalars(self)
        if self.agent not in AGENTS:
            raise ValueError(f"unknown agent type {self.agent!r}; expected one of {AGENTS}")
        if isinstance(self.model, dict):
            self.model = ModelConfig.from_dict(self.model)
        if isinstance(self.awr, dict):
            self.awr = AwrConfig.from_dict(self.awr)
        if isinstance(self.disc, dict):
            self.disc = DiscConfig.from_dict(self.disc)
        if self.epochs < 1 or self.minibatches < 1 or self.steps_per_env < 1:
            raise ValueError("epochs, minibatches, and steps_per_env must be >= 1")
        if self.max_iterations < 1 or self.test_episodes < 1:
            raise ValueError("max_iterations and test_episodes must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "AgentConfig":
        return _from_dict(cls, data, "agent")


def load_agent_config(path: str | Path) -> AgentConfig:
    path = Path(path)
    with open(path) as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise ValueError(f"agent config {path} must contain a mapping")
    return AgentConfig.from_dict(data)
