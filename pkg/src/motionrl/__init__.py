"""Desk-scale motion imitation RL: characters, clips, physics, agents."""

__version__ = "0.1.0"

from .character import (
    BodySpec,
    CharacterError,
    CharacterModel,
    JointSpec,
    load_character,
    make_pendulum,
    make_planar_chain,
    resolve_character,
    save_character,
)
from .kinematics import Pose, PoseVelocity, forward_kinematics, interpolate_pose
from .motion import (
    MotionClip,
    MotionFormatError,
    MotionLibrary,
    load_motion,
    load_motion_source,
    sample_pose,
    save_motion,
)

__all__ = [
    "BodySpec",
    "CharacterError",
    "CharacterModel",
    "JointSpec",
    "MotionClip",
    "MotionFormatError",
    "MotionLibrary",
    "Pose",
    "PoseVelocity",
    "__version__",
    "forward_kinematics",
    "interpolate_pose",
    "load_character",
    "load_motion",
    "load_motion_source",
    "make_pendulum",
    "make_planar_chain",
    "resolve_character",
    "sample_pose",
    "save_character",
    "save_motion",
]
