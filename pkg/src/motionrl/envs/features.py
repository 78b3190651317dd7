"""Observation feature extractors shared by tasks and discriminators."""

from __future__ import annotations

import numpy as np

from ..character import CharacterModel
from ..kinematics import Pose, PoseVelocity, dof_from_pose, forward_kinematics
from ..rotations import (
    exp_map_to_quat,
    heading_quat,
    horizontal_indices,
    quat_conjugate,
    quat_mul,
    quat_rotate,
    quat_to_exp_map,
    up_index,
)


def proprio_features(ch: CharacterModel, pose: Pose, vel: PoseVelocity) -> np.ndarray:
    """Per-env body-state features: root height, root rotation exp map,
    root linear/angular velocity, DoF positions and velocities.

    Width: 10 + 2 * dof_count.
    """
    up = up_index(ch.up_axis)
    height = pose.root_pos[..., up : up + 1]
    rot = quat_to_exp_map(pose.root_rot)
    dof = dof_from_pose(ch, pose)
    return np.concatenate(
        [height, rot, vel.root_lin_vel, vel.root_ang_vel, dof, vel.dof_vel], axis=-1
    )


def proprio_dim(ch: CharacterModel) -> int:
    return 10 + 2 * ch.dof_count


def _static_features(ch: CharacterModel, pose: Pose, inv_heading) -> np.ndarray:
    """[root height, canonical root rotation, dof, canonical root-relative
    body positions] for one pose; width 4 + D + 3*(num_bodies-1)."""
    up = up_index(ch.up_axis)
    height = pose.root_pos[..., up : up + 1]
    rot = quat_to_exp_map(quat_mul(inv_heading, pose.root_rot))
    dof = dof_from_pose(ch, pose)
    body_pos, _ = forward_kinematics(ch, pose)
    rel = body_pos[..., 1:, :] - pose.root_pos[..., None, :]
    rel = quat_rotate(inv_heading[..., None, :], rel)
    flat = rel.reshape(rel.shape[:-2] + (-1,))
    return np.concatenate([height, rot, dof, flat], axis=-1)


def amp_observation_pair(ch: CharacterModel, prev, cur, dt: float) -> np.ndarray:
    """Discriminator features for a state transition.

    Accepts Pose values or objects with a ``pose`` attribute. Velocities are
    finite-differenced between the two poses inside this extractor so that
    features built from simulated transitions and from raw motion-clip frame
    pairs are directly comparable; identical poses give zero velocities. The
    whole feature is invariant to rotating both poses about the up axis and
    to horizontal translation.

    Width: 2 * (4 + D + 3*(num_bodies-1)) + 6 + D.
    """
    prev_pose: Pose = getattr(prev, "pose", prev)
    cur_pose: Pose = getattr(cur, "pose", cur)
    # anchor the canonical frame to the first pose's heading; positions are
    # kept root-relative so horizontal translation drops out by construction
    inv_heading = quat_conjugate(heading_quat(prev_pose.root_rot, ch.up_axis))

    f0 = _static_features(ch, prev_pose, inv_heading)
    f1 = _static_features(ch, cur_pose, inv_heading)

    lin = quat_rotate(inv_heading, (cur_pose.root_pos - prev_pose.root_pos) / dt)
    rel_rot = quat_mul(cur_pose.root_rot, quat_conjugate(prev_pose.root_rot))
    ang = quat_rotate(inv_heading, quat_to_exp_map(rel_rot) / dt)
    dof0 = dof_from_pose(ch, prev_pose)
    dof1 = dof_from_pose(ch, cur_pose)
    dof_vel = _dof_difference(ch, dof0, dof1) / dt
    return np.concatenate([f0, f1, lin, ang, dof_vel], axis=-1)


def amp_observation_dim(ch: CharacterModel) -> int:
    static = 4 + ch.dof_count + 3 * (ch.num_bodies - 1)
    return 2 * static + 6 + ch.dof_count


def _dof_difference(ch: CharacterModel, dof0: np.ndarray, dof1: np.ndarray) -> np.ndarray:
    """Per-DoF difference; exp-map blocks use the relative rotation."""
    diff = dof1 - dof0
    off = 0
    for j in ch.joints:
        if j.kind == "spherical":
            q0 = exp_map_to_quat(dof0[..., off : off + 3])
            q1 = exp_map_to_quat(dof1[..., off : off + 3])
            diff[..., off : off + 3] = quat_to_exp_map(quat_mul(quat_conjugate(q0), q1))
        elif j.kind == "revolute":
            d = diff[..., off]
            diff[..., off] = np.arctan2(np.sin(d), np.cos(d))
        off += j.dof
    return diff


def add_difference_obs(
    ch: CharacterModel,
    sim_pose: Pose,
    sim_vel: PoseVelocity,
    ref_pose: Pose,
    ref_vel: PoseVelocity,
) -> np.ndarray:
    """Per-feature tracking differences (sim minus reference).

    Layout: root position error (3), root rotation error exp map (3), root
    linear velocity error (3), root angular velocity error (3), per-joint
    rotation error in DoF layout, per-DoF velocity error. Perfect tracking
    gives an exactly zero vector. Width: 12 + 2 * dof_count.
    """
    pos_err = sim_pose.root_pos - ref_pose.root_pos
    rot_err = quat_to_exp_map(
        quat_mul(sim_pose.root_rot, quat_conjugate(ref_pose.root_rot))
    )
    lin_err = sim_vel.root_lin_vel - ref_vel.root_lin_vel
    ang_err = sim_vel.root_ang_vel - ref_vel.root_ang_vel
    joint_err = _dof_difference(ch, dof_from_pose(ch, ref_pose), dof_from_pose(ch, sim_pose))
    vel_err = sim_vel.dof_vel - ref_vel.dof_vel
    return np.concatenate([pos_err, rot_err, lin_err, ang_err, joint_err, vel_err], axis=-1)


def add_difference_dim(ch: CharacterModel) -> int:
    return 12 + 2 * ch.dof_count


def goal_in_local_frame(ch: CharacterModel, pose: Pose, goal_horizontal: np.ndarray) -> np.ndarray:
    """2D goal position expressed in the root's heading-local frame."""
    h = horizontal_indices(ch.up_axis)
    goal3 = np.zeros(pose.root_pos.shape, dtype=np.float64)
    goal3[..., h[0]] = goal_horizontal[..., 0]
    goal3[..., h[1]] = goal_horizontal[..., 1]
    delta = goal3 - pose.root_pos
    delta[..., up_index(ch.up_axis)] = 0.0
    inv_heading = quat_conjugate(heading_quat(pose.root_rot, ch.up_axis))
    local = quat_rotate(inv_heading, delta)
    return np.stack([local[..., h[0]], local[..., h[1]]], axis=-1)
