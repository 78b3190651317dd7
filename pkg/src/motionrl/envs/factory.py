"""Environment construction from config documents."""

from __future__ import annotations

from pathlib import Path

import yaml

from ..motion import load_motion_source
from .base import EnvConfig, EnvConfigError, VectorEnv, resolve_env_character
from .target import TargetLocationEnv
from .tracking import AmpEnv, TrackingEnv

MOTION_TASKS = ("deepmimic", "amp", "add", "view_motion")


def load_env_config(path) -> EnvConfig:
    doc = yaml.safe_load(Path(path).read_text())
    if not isinstance(doc, dict):
        raise EnvConfigError(f"env config {path} must be a mapping")
    cfg = EnvConfig.from_dict(doc)
    if cfg.motion_file is not None:
        # motion paths are relative to the config file
        motion = Path(cfg.motion_file)
        if not motion.is_absolute():
            cfg.motion_file = str(Path(path).parent / motion)
    return cfg


def build_env(
    config: EnvConfig | dict,
    num_envs: int,
    seed: int = 0,
    motion_file=None,
) -> VectorEnv:
    """Instantiate the env a config describes.

    ``motion_file`` overrides the config's motion source (the command line
    exposes this for quickly pointing a task at another clip).
    """
    if isinstance(config, dict):
        config = EnvConfig.from_dict(config)
    character = resolve_env_character(config.character)
    if motion_file is None:
        motion_file = config.motion_file

    if config.task in MOTION_TASKS:
        if motion_file is None:
            raise EnvConfigError(f"task {config.task!r} requires a motion_file")
        library = load_motion_source(motion_file, character)
        if config.task == "amp":
            return AmpEnv(character, num_envs, config, library, seed=seed)
        return TrackingEnv(character, num_envs, config, library, seed=seed)
    if config.task == "target_location":
        return TargetLocationEnv(character, num_envs, config, seed=seed)
    raise EnvConfigError(f"unknown task {config.task!r}")
