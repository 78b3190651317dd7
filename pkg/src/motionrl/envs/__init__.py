"""Vectorized task environments over the simulation backends."""

from .base import (
    DoneFlag,
    EnvConfig,
    EnvConfigError,
    PoseErrorTermination,
    RewardWeights,
    StepResult,
    TargetTaskConfig,
    VectorEnv,
    combine_done,
    resolve_env_character,
)
from .factory import build_env, load_env_config
from .features import (
    add_difference_dim,
    add_difference_obs,
    amp_observation_dim,
    amp_observation_pair,
    goal_in_local_frame,
    proprio_dim,
    proprio_features,
)
from .rewards import tracking_reward
from .target import TargetLocationEnv
from .tracking import AmpEnv, TrackingEnv

__all__ = [
    "AmpEnv",
    "DoneFlag",
    "EnvConfig",
    "EnvConfigError",
    "PoseErrorTermination",
    "RewardWeights",
    "StepResult",
    "TargetLocationEnv",
    "TargetTaskConfig",
    "TrackingEnv",
    "VectorEnv",
    "add_difference_dim",
    "add_difference_obs",
    "amp_observation_dim",
    "amp_observation_pair",
    "build_env",
    "combine_done",
    "goal_in_local_frame",
    "load_env_config",
    "proprio_dim",
    "proprio_features",
    "resolve_env_character",
    "tracking_reward",
]
