"""Poses, forward kinematics, and the flat motion-frame layout.

A motion frame is ``[root position (3), root rotation exp-map (3), joint
rotations in depth-first joint order]`` where spherical joints contribute a
3-component exp map and revolute joints a single angle. The same per-joint
layout (minus the root entries) is the character's flat dof vector used by
engines and observation builders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .character import CharacterModel
from .rotations import (
    axis_angle_to_quat,
    exp_map_to_quat,
    quat_angle,
    quat_identity,
    quat_mul,
    quat_rotate,
    quat_to_exp_map,
    slerp,
)


@dataclass
class Pose:
    """Character pose; all arrays share leading batch dimensions."""

    root_pos: np.ndarray  # (..., 3)
    root_rot: np.ndarray  # (..., 4) unit quaternion
    joint_rot: list  # per joint: (..., 4) quat | (...,) angle | None

    def copy(self) -> "Pose":
        return Pose(
            self.root_pos.copy(),
            self.root_rot.copy(),
            [None if r is None else r.copy() for r in self.joint_rot],
        )


@dataclass
class PoseVelocity:
    root_lin_vel: np.ndarray  # (..., 3)
    root_ang_vel: np.ndarray  # (..., 3)
    dof_vel: np.ndarray  # (..., dof_count)

    def copy(self) -> "PoseVelocity":
        return PoseVelocity(self.root_lin_vel.copy(), self.root_ang_vel.copy(), self.dof_vel.copy())


def zero_pose(ch: CharacterModel, batch=()) -> Pose:
    batch = tuple(batch)
    joint_rot = []
    for j in ch.joints:
        if j.kind == "spherical":
            joint_rot.append(quat_identity(batch))
        elif j.kind == "revolute":
            joint_rot.append(np.zeros(batch, dtype=np.float64))
        else:
            joint_rot.append(None)
    return Pose(
        root_pos=np.zeros(batch + (3,), dtype=np.float64),
        root_rot=quat_identity(batch),
        joint_rot=joint_rot,
    )


def zero_velocity(ch: CharacterModel, batch=()) -> PoseVelocity:
    batch = tuple(batch)
    return PoseVelocity(
        root_lin_vel=np.zeros(batch + (3,), dtype=np.float64),
        root_ang_vel=np.zeros(batch + (3,), dtype=np.float64),
        dof_vel=np.zeros(batch + (ch.dof_count,), dtype=np.float64),
    )


def pose_from_frame(ch: CharacterModel, frame) -> Pose:
    frame = np.asarray(frame, dtype=np.float64)
    if frame.shape[-1] != ch.frame_width:
        raise ValueError(
            f"frame width {frame.shape[-1]} does not match character frame_width {ch.frame_width}"
        )
    pose = Pose(
        root_pos=frame[..., 0:3].copy(),
        root_rot=exp_map_to_quat(frame[..., 3:6]),
        joint_rot=[],
    )
    off = 6
    for j in ch.joints:
        if j.kind == "spherical":
            pose.joint_rot.append(exp_map_to_quat(frame[..., off : off + 3]))
        elif j.kind == "revolute":
            pose.joint_rot.append(frame[..., off].copy())
        else:
            pose.joint_rot.append(None)
        off += j.dof
    return pose


def frame_from_pose(ch: CharacterModel, pose: Pose) -> np.ndarray:
    batch = pose.root_pos.shape[:-1]
    frame = np.zeros(batch + (ch.frame_width,), dtype=np.float64)
    frame[..., 0:3] = pose.root_pos
    frame[..., 3:6] = quat_to_exp_map(pose.root_rot)
    off = 6
    for j, rot in zip(ch.joints, pose.joint_rot):
        if j.kind == "spherical":
            frame[..., off : off + 3] = quat_to_exp_map(rot)
        elif j.kind == "revolute":
            frame[..., off] = rot
        off += j.dof
    return frame


def dof_from_pose(ch: CharacterModel, pose: Pose) -> np.ndarray:
    """Flat dof vector (exp maps for spherical joints, angles for revolute)."""
    batch = pose.root_pos.shape[:-1]
    dof = np.zeros(batch + (ch.dof_count,), dtype=np.float64)
    off = 0
    for j, rot in zip(ch.joints, pose.joint_rot):
        if j.kind == "spherical":
            dof[..., off : off + 3] = quat_to_exp_map(rot)
        elif j.kind == "revolute":
            dof[..., off] = rot
        off += j.dof
    return dof


def pose_from_dof(ch: CharacterModel, root_pos, root_rot, dof) -> Pose:
    dof = np.asarray(dof, dtype=np.float64)
    if dof.shape[-1] != ch.dof_count:
        raise ValueError(f"dof vector has {dof.shape[-1]} entries, expected {ch.dof_count}")
    joint_rot = []
    off = 0
    for j in ch.joints:
        if j.kind == "spherical":
            joint_rot.append(exp_map_to_quat(dof[..., off : off + 3]))
        elif j.kind == "revolute":
            joint_rot.append(dof[..., off].copy())
        else:
            joint_rot.append(None)
        off += j.dof
    return Pose(
        root_pos=np.asarray(root_pos, dtype=np.float64).copy(),
        root_rot=np.asarray(root_rot, dtype=np.float64).copy(),
        joint_rot=joint_rot,
    )


def joint_quat(ch: CharacterModel, pose: Pose, idx: int) -> np.ndarray:
    """Joint rotation as a quaternion regardless of joint kind."""
    j = ch.joints[idx]
    rot = pose.joint_rot[idx]
    if j.kind == "spherical":
        return rot
    if j.kind == "revolute":
        return axis_angle_to_quat(np.asarray(j.axis, dtype=np.float64), np.asarray(rot))
    batch = pose.root_pos.shape[:-1]
    return quat_identity(batch)


def forward_kinematics(ch: CharacterModel, pose: Pose):
    """World transforms of every body.

    Returns ``(positions, rotations)`` with shapes (..., num_bodies, 3) and
    (..., num_bodies, 4). Body 0 is the root; body i (i >= 1) carries the
    frame of joint i-1: parent transform, then the joint's local offset,
    then the joint rotation.
    """
    if pose.root_pos.shape[-1] != 3:
        raise ValueError("root position must have 3 components")
    if len(pose.joint_rot) != ch.num_joints:
        raise ValueError(
            f"pose has {len(pose.joint_rot)} joint rotations, character has {ch.num_joints}"
        )
    batch = pose.root_pos.shape[:-1]
    pos = np.zeros(batch + (ch.num_bodies, 3), dtype=np.float64)
    rot = np.zeros(batch + (ch.num_bodies, 4), dtype=np.float64)
    pos[..., 0, :] = pose.root_pos
    rot[..., 0, :] = pose.root_rot
    for i, j in enumerate(ch.joints):
        pb = j.parent + 1
        parent_rot = rot[..., pb, :]
        offset = np.asarray(j.local_offset, dtype=np.float64)
        pos[..., i + 1, :] = pos[..., pb, :] + quat_rotate(parent_rot, offset)
        rot[..., i + 1, :] = quat_mul(parent_rot, joint_quat(ch, pose, i))
    return pos, rot


def joint_rotation_errors(ch: CharacterModel, a: Pose, b: Pose) -> np.ndarray:
    """Per-joint geodesic rotation distance between two poses, (..., J)."""
    batch = a.root_pos.shape[:-1]
    errs = np.zeros(batch + (ch.num_joints,), dtype=np.float64)
    for i, j in enumerate(ch.joints):
        if j.kind == "spherical":
            errs[..., i] = quat_angle(a.joint_rot[i], b.joint_rot[i])
        elif j.kind == "revolute":
            diff = np.asarray(a.joint_rot[i]) - np.asarray(b.joint_rot[i])
            errs[..., i] = np.abs(np.arctan2(np.sin(diff), np.cos(diff)))
    return errs


def interpolate_pose(ch: CharacterModel, a: Pose, b: Pose, u) -> Pose:
    """Linear blend of positions/angles, slerp of rotations.

    ``u`` may be a scalar or an array matching the pose batch shape.
    """
    u = np.asarray(u, dtype=np.float64)
    uv = u[..., None]  # broadcast over vector components
    joint_rot = []
    for j, ra, rb in zip(ch.joints, a.joint_rot, b.joint_rot):
        if j.kind == "spherical":
            joint_rot.append(slerp(ra, rb, u))
        elif j.kind == "revolute":
            joint_rot.append((1.0 - u) * ra + u * rb)
        else:
            joint_rot.append(None)
    return Pose(
        root_pos=(1.0 - uv) * a.root_pos + uv * b.root_pos,
        root_rot=slerp(a.root_rot, b.root_rot, u),
        joint_rot=joint_rot,
    )
