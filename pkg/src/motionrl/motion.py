"""Motion clips: storage, file IO, datasets, and time sampling.

Clip files are UTF-8 JSON with keys ``fps`` (number), ``loop`` ("none" |
"wrap"), ``character`` (string), ``frames`` (array of equal-width number
rows). A dataset file is a JSON array of ``{"file": ..., "weight": w >= 0}``
entries; sampling probabilities are proportional to the weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .character import CharacterModel
from .kinematics import Pose, PoseVelocity, interpolate_pose, pose_from_frame, zero_velocity
from .rotations import quat_conjugate, quat_mul, quat_to_exp_map

LOOP_MODES = ("none", "wrap")


class MotionFormatError(ValueError):
    """Raised for malformed motion or dataset files."""


@dataclass
class MotionClip:
    fps: float
    loop: str
    frames: np.ndarray  # (num_frames, frame_width)
    character: str = "character"

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.fps <= 0:
            raise MotionFormatError(f"fps must be positive, got {self.fps}")
        if self.loop not in LOOP_MODES:
            raise MotionFormatError(f"loop must be one of {LOOP_MODES}, got {self.loop!r}")
        if self.frames.ndim != 2 or self.frames.shape[0] < 1:
            raise MotionFormatError("frames must be a non-empty 2D matrix")
        bad = np.where(~np.isfinite(self.frames))
        if bad[0].size:
            raise MotionFormatError(f"row {bad[0][0]}: non-finite entry")

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def frame_width(self) -> int:
        return self.frames.shape[1]

    @property
    def duration(self) -> float:
        return (self.num_frames - 1) / self.fps


def save_motion(clip: MotionClip, path) -> None:
    doc = {
        "fps": clip.fps,
        "loop": clip.loop,
        "character": clip.character,
        "frames": clip.frames.tolist(),
    }
    Path(path).write_text(json.dumps(doc))


def load_motion(path, character: CharacterModel | None = None) -> MotionClip:
    """Load a clip file, validating row widths against ``character`` if given."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise MotionFormatError(f"{path}: invalid JSON ({e})") from e
    for key in ("fps", "loop", "frames"):
        if key not in doc:
            raise MotionFormatError(f"{path}: missing key {key!r}")
    rows = doc["frames"]
    if not isinstance(rows, list) or not rows:
        raise MotionFormatError(f"{path}: frames must be a non-empty array")
    width = len(rows[0]) if isinstance(rows[0], list) else -1
    expected = character.frame_width if character is not None else width
    for k, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != expected:
            got = len(row) if isinstance(row, list) else "non-array"
            raise MotionFormatError(f"{path}: row {k}: width {got}, expected {expected}")
    frames = np.asarray(rows, dtype=np.float64)
    try:
        return MotionClip(
            fps=float(doc["fps"]),
            loop=str(doc["loop"]),
            frames=frames,
            character=str(doc.get("character", "character")),
        )
    except MotionFormatError as e:
        raise MotionFormatError(f"{path}: {e}") from e


@dataclass
class MotionLibrary:
    """One or more clips with sampling weights."""

    clips: list[MotionClip]
    weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not self.clips:
            raise MotionFormatError("motion library needs at least one clip")
        if self.weights is None:
            self.weights = np.ones(len(self.clips), dtype=np.float64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (len(self.clips),) or np.any(self.weights < 0):
            raise MotionFormatError("weights must be non-negative, one per clip")
        total = self.weights.sum()
        if total <= 0:
            raise MotionFormatError("at least one clip weight must be positive")
        self.probs = self.weights / total

    def sample_clip(self, rng: np.random.Generator) -> int:
        return int(rng.choice(len(self.clips), p=self.probs))


def load_motion_source(path, character: CharacterModel | None = None) -> MotionLibrary:
    """Load a clip file or a dataset file into a MotionLibrary."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise MotionFormatError(f"{path}: invalid JSON ({e})") from e
    if isinstance(doc, list):  # dataset
        clips, weights = [], []
        for k, entry in enumerate(doc):
            if not isinstance(entry, dict) or "file" not in entry:
                raise MotionFormatError(f"{path}: dataset entry {k} needs a 'file' key")
            clip_path = Path(entry["file"])
            if not clip_path.is_absolute():
                clip_path = path.parent / clip_path
            clips.append(load_motion(clip_path, character))
            weights.append(float(entry.get("weight", 1.0)))
        return MotionLibrary(clips, np.asarray(weights))
    return MotionLibrary([load_motion(path, character)])


def _frame_pose(ch: CharacterModel, clip: MotionClip, idx) -> Pose:
    return pose_from_frame(ch, clip.frames[idx])


def _sample_pose_only(ch: CharacterModel, clip: MotionClip, t: np.ndarray) -> Pose:
    """Pose at times t (already validated non-negative), batched."""
    t = np.asarray(t, dtype=np.float64)
    dur = clip.duration
    if clip.num_frames == 1 or dur == 0.0:
        pose = _frame_pose(ch, clip, np.zeros(t.shape, dtype=np.int64))
        return pose
    if clip.loop == "wrap":
        cycles = np.floor(t / dur)
        t_eff = t - cycles * dur
    else:
        cycles = np.zeros_like(t)
        t_eff = np.clip(t, 0.0, dur)
    k = np.minimum((t_eff * clip.fps).astype(np.int64), clip.num_frames - 2)
    u = t_eff * clip.fps - k
    pose_a = _frame_pose(ch, clip, k)
    pose_b = _frame_pose(ch, clip, k + 1)
    pose = interpolate_pose(ch, pose_a, pose_b, u)
    if clip.loop == "wrap":
        # horizontal root displacement accumulates per completed cycle
        delta = clip.frames[-1, 0:2] - clip.frames[0, 0:2]
        pose.root_pos[..., 0:2] += cycles[..., None] * delta
    return pose


def sample_pose(
    ch: CharacterModel, clip: MotionClip, t
) -> tuple[Pose, PoseVelocity]:
    """Pose and velocity of the clip at time(s) t (seconds).

    Root position and revolute angles interpolate linearly between the
    bracketing frames; rotations slerp. Velocities come from a central
    finite difference with h = 1/(2 fps), one-sided at the ends of
    non-looping clips.
    """
    t = np.asarray(t, dtype=np.float64)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    if np.any(t < 0.0):
        raise ValueError("sample time must be non-negative")
    if np.any(~np.isfinite(t)):
        raise ValueError("sample time must be finite")

    pose = _sample_pose_only(ch, clip, t)

    h = 1.0 / (2.0 * clip.fps)
    dur = clip.duration
    if dur == 0.0:
        vel = zero_velocity(ch, t.shape)
    else:
        if clip.loop == "wrap":
            t_lo, t_hi = t - h, t + h
            # keep the backward sample non-negative; shift the stencil by
            # whole cycles, which the per-cycle offset makes exact for x/y
            # and harmless elsewhere only when t-h >= 0, so bump instead
            shift = np.where(t_lo < 0.0, dur, 0.0)
            t_lo, t_hi = t_lo + shift, t_hi + shift
        else:
            t_lo = np.maximum(t - h, 0.0)
            t_hi = np.minimum(t + h, dur)
        span = t_hi - t_lo
        span = np.where(span <= 0, 1.0, span)
        p_lo = _sample_pose_only(ch, clip, t_lo)
        p_hi = _sample_pose_only(ch, clip, t_hi)
        vel = _pose_difference_velocity(ch, p_lo, p_hi, span)

    if scalar:
        pose = Pose(pose.root_pos[0], pose.root_rot[0], [None if r is None else r[0] for r in pose.joint_rot])
        vel = PoseVelocity(vel.root_lin_vel[0], vel.root_ang_vel[0], vel.dof_vel[0])
    return pose, vel


def _pose_difference_velocity(
    ch: CharacterModel, lo: Pose, hi: Pose, span: np.ndarray
) -> PoseVelocity:
    inv = 1.0 / span
    root_lin = (hi.root_pos - lo.root_pos) * inv[..., None]
    # world-frame angular velocity of the root
    dq = quat_mul(hi.root_rot, quat_conjugate(lo.root_rot))
    root_ang = quat_to_exp_map(dq) * inv[..., None]
    dof_vel = np.zeros(span.shape + (ch.dof_count,), dtype=np.float64)
    off = 0
    for i, j in enumerate(ch.joints):
        if j.kind == "spherical":
            # local angular velocity from the relative joint rotation
            rel = quat_mul(quat_conjugate(lo.joint_rot[i]), hi.joint_rot[i])
            dof_vel[..., off : off + 3] = quat_to_exp_map(rel) * inv[..., None]
        elif j.kind == "revolute":
            dof_vel[..., off] = (hi.joint_rot[i] - lo.joint_rot[i]) * inv
        off += j.dof
    return PoseVelocity(root_lin, root_ang, dof_vel)
