"""Synthetic reference clips for tests, demos, and the desk-scale tasks."""

from __future__ import annotations

import numpy as np

from .character import CharacterModel
from .motion import MotionClip


def make_sine_chain_clip(
    ch: CharacterModel,
    duration: float = 2.0,
    fps: float = 30.0,
    amplitude: float = 0.6,
    frequency: float = 0.5,
    root_pos=(0.0, 0.0, 0.0),
    loop: str = "wrap",
) -> MotionClip:
    """Per-joint phase-shifted sine angles for an all-revolute character."""
    if any(j.kind != "revolute" for j in ch.joints):
        raise ValueError("sine chain clip needs an all-revolute character")
    n = int(round(duration * fps)) + 1
    t = np.arange(n) / fps
    frames = np.zeros((n, ch.frame_width), dtype=np.float64)
    frames[:, 0:3] = np.asarray(root_pos, dtype=np.float64)
    for k in range(ch.num_joints):
        phase = 2.0 * np.pi * k / max(ch.num_joints, 1)
        frames[:, 6 + k] = amplitude * np.sin(2.0 * np.pi * frequency * t + phase)
    return MotionClip(fps=fps, loop=loop, frames=frames, character=ch.name)


def make_static_clip(
    ch: CharacterModel,
    dof_values,
    root_pos=(0.0, 0.0, 0.0),
    hold: float = 1.0,
    fps: float = 30.0,
) -> MotionClip:
    """Constant-pose clip (e.g. an upright target for swing-up tasks)."""
    dof = np.asarray(dof_values, dtype=np.float64)
    if dof.shape != (ch.dof_count,):
        raise ValueError(f"expected {ch.dof_count} dof values, got {dof.shape}")
    n = max(int(round(hold * fps)) + 1, 2)
    frames = np.zeros((n, ch.frame_width), dtype=np.float64)
    frames[:, 0:3] = np.asarray(root_pos, dtype=np.float64)
    frames[:, 6:] = dof
    return MotionClip(fps=fps, loop="none", frames=frames, character=ch.name)
