"""Pose-tracking reward."""

from __future__ import annotations

import numpy as np

from ..character import CharacterModel
from ..kinematics import Pose, PoseVelocity, forward_kinematics, joint_rotation_errors
from .base import RewardWeights


def tracking_reward(
    ch: CharacterModel,
    sim_pose: Pose,
    sim_vel: PoseVelocity,
    ref_pose: Pose,
    ref_vel: PoseVelocity,
    weights: RewardWeights | None = None,
):
    """Weighted product-of-exponentials imitation reward.

    r = w_p exp(-a_p sum_j d(q_ref, q_sim)^2) + w_v exp(-a_v sum |dq_vel|^2)
      + w_e exp(-a_e sum_e |dx_ee|^2)        + w_r exp(-a_r |dx_root|^2)

    with d the per-joint geodesic rotation distance. Identical pose and
    velocity give r = sum of weights (1 with the defaults). Returns
    ``(reward, components)`` where components holds the four unweighted
    exponential terms for logging.
    """
    w = weights if weights is not None else RewardWeights()

    rot_err = joint_rotation_errors(ch, sim_pose, ref_pose)
    pose_term = np.exp(-w.pose_scale * np.sum(rot_err**2, axis=-1))

    vel_sq = np.sum((sim_vel.dof_vel - ref_vel.dof_vel) ** 2, axis=-1)
    vel_term = np.exp(-w.velocity_scale * vel_sq)

    ee = ch.end_effector_bodies()
    sim_xyz, _ = forward_kinematics(ch, sim_pose)
    ref_xyz, _ = forward_kinematics(ch, ref_pose)
    ee_sq = np.sum((sim_xyz[..., ee, :] - ref_xyz[..., ee, :]) ** 2, axis=(-1, -2))
    ee_term = np.exp(-w.end_effector_scale * ee_sq)

    root_sq = np.sum((sim_pose.root_pos - ref_pose.root_pos) ** 2, axis=-1)
    root_term = np.exp(-w.root_scale * root_sq)

    reward = (
        w.pose * pose_term
        + w.velocity * vel_term
        + w.end_effector * ee_term
        + w.root * root_term
    )
    components = {
        "pose": pose_term,
        "velocity": vel_term,
        "end_effector": ee_term,
        "root": root_term,
    }
    return reward, components
