"""Learning stack: buffers, normalization, models, losses, agents, workers."""

from .agents import (
    AGENT_CLASSES,
    ADDAgent,
    AMPAgent,
    AWRAgent,
    Agent,
    CheckpointError,
    PPOAgent,
    SoloComm,
    TrainingDivergedError,
    build_agent,
)
from .buffer import ExperienceBuffer, RingBuffer
from .checkpoint import load_checkpoint, save_checkpoint
from .config import AGENTS, AgentConfig, AwrConfig, DiscConfig, load_agent_config
from .distributed import WorkerComm, WorkerGroup, allreduce_gradients
from .gae import compute_returns_advantages
from .losses import (
    awr_policy_loss,
    awr_weights,
    discriminator_loss,
    ppo_policy_loss,
    style_reward,
    value_loss,
)
from .models import (
    ActorCritic,
    Discriminator,
    GaussianPolicy,
    ModelConfig,
    ValueFunction,
    flat_gradients,
    flat_parameters,
    set_flat_parameters,
)
from .normalizer import RunningNormalizer

__all__ = [
    "AGENT_CLASSES",
    "AGENTS",
    "ADDAgent",
    "AMPAgent",
    "AWRAgent",
    "ActorCritic",
    "Agent",
    "AgentConfig",
    "AwrConfig",
    "CheckpointError",
    "DiscConfig",
    "Discriminator",
    "ExperienceBuffer",
    "GaussianPolicy",
    "ModelConfig",
    "PPOAgent",
    "RingBuffer",
    "RunningNormalizer",
    "SoloComm",
    "TrainingDivergedError",
    "ValueFunction",
    "WorkerComm",
    "WorkerGroup",
    "allreduce_gradients",
    "awr_policy_loss",
    "awr_weights",
    "build_agent",
    "compute_returns_advantages",
    "discriminator_loss",
    "flat_gradients",
    "flat_parameters",
    "load_agent_config",
    "load_checkpoint",
    "ppo_policy_loss",
    "save_checkpoint",
    "set_flat_parameters",
    "style_reward",
    "value_loss",
]
