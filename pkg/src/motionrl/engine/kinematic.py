"""Kinematic backend: commands write poses directly, no dynamics.

In pos/pd_1d mode each control step replaces the joint DoF values with the
commanded targets (plus optional Gaussian actuation noise) and derives joint
velocities by finite difference. In vel mode joint values integrate the
commanded velocities. The root is never moved by commands; tracking envs
write it explicitly from the reference motion.

Torque mode is rejected at construction since there is nothing to integrate
torques against.
"""

from __future__ import annotations

import copy

import numpy as np

from ..character import CharacterModel
from ..kinematics import Pose, PoseVelocity, dof_from_pose, forward_kinematics, pose_from_dof
from ..rotations import (
    exp_map_to_quat,
    quat_conjugate,
    quat_mul,
    quat_rotate,
    quat_to_exp_map,
    up_index,
)
from .base import Engine, EngineConfig, EngineConfigError, SimState


class KinematicEngine(Engine):
    def __init__(
        self,
        character: CharacterModel,
        num_envs: int,
        config: EngineConfig,
        rng: np.random.Generator | None = None,
    ):
        if config.control_mode == "torque":
            raise EngineConfigError("kinematic backend does not support torque control")
        super().__init__(character, num_envs, config)
        self._rng = rng if rng is not None else np.random.default_rng(0)
        d = character.dof_count
        self._root_pos = np.zeros((num_envs, 3), dtype=np.float64)
        self._root_pos[:, up_index(character.up_axis)] = character.extras.get("root_height", 0.0)
        self._root_rot = np.zeros((num_envs, 4), dtype=np.float64)
        self._root_rot[:, 0] = 1.0
        self._dof_pos = np.zeros((num_envs, d), dtype=np.float64)
        self._root_lin_vel = np.zeros((num_envs, 3), dtype=np.float64)
        self._root_ang_vel = np.zeros((num_envs, 3), dtype=np.float64)
        self._dof_vel = np.zeros((num_envs, d), dtype=np.float64)

    def _apply_noise(self, commands: np.ndarray) -> np.ndarray:
        sigma = self.config.actuation_noise
        if sigma <= 0.0:
            return commands
        return commands + self._rng.normal(0.0, sigma, size=commands.shape)

    def _dof_velocity(self, old: np.ndarray, new: np.ndarray, dt: float) -> np.ndarray:
        """Finite-difference DoF velocity; exp-map blocks use the relative
        rotation so the result is a local angular velocity, not a raw
        coordinate difference."""
        vel = (new - old) / dt
        off = 0
        for j in self.character.joints:
            if j.kind == "spherical":
                q0 = exp_map_to_quat(old[:, off : off + 3])
                q1 = exp_map_to_quat(new[:, off : off + 3])
                rel = quat_to_exp_map(quat_mul(quat_conjugate(q0), q1))
                vel[:, off : off + 3] = rel / dt
            off += j.dof
        return vel

    def _step_substeps(self, commands: np.ndarray) -> None:
        dt = self.config.control_dt
        mode = self.config.control_mode
        if mode == "none":
            return
        if mode in ("pos", "pd_1d"):
            new = self._apply_noise(commands)
            self._dof_vel = self._dof_velocity(self._dof_pos, new, dt)
            self._dof_pos = new
        elif mode == "vel":
            self._dof_pos = self._dof_pos + commands * dt
            self._dof_vel = commands.copy()

    def write_root(self, pos: np.ndarray, rot: np.ndarray, lin_vel: np.ndarray, ang_vel: np.ndarray) -> None:
        """Set the root transform for all envs (tracking envs sync this from
        the reference motion each step)."""
        self._root_pos = np.array(pos, dtype=np.float64).reshape(self.num_envs, 3)
        self._root_rot = np.array(rot, dtype=np.float64).reshape(self.num_envs, 4)
        self._root_lin_vel = np.array(lin_vel, dtype=np.float64).reshape(self.num_envs, 3)
        self._root_ang_vel = np.array(ang_vel, dtype=np.float64).reshape(self.num_envs, 3)

    def _contacts(self) -> np.ndarray:
        pose = self._pose()
        pos, rot = forward_kinematics(self.character, pose)
        up = up_index(self.character.up_axis)
        flags = np.zeros((self.num_envs, self.character.num_bodies), dtype=bool)
        for b, body in enumerate(self.character.bodies):
            clearance = float(body.size[1]) if len(body.size) > 1 else 0.0
            # capsule axis runs from the body origin through the COM to 2*COM
            ends = [np.zeros(3), 2.0 * np.asarray(body.com, dtype=np.float64)]
            low = np.full(self.num_envs, np.inf)
            for e in ends:
                p = pos[:, b] + quat_rotate(rot[:, b], np.broadcast_to(e, (self.num_envs, 3)))
                low = np.minimum(low, p[:, up] - clearance)
            flags[:, b] = low <= self.config.ground_height + self.config.contact.tolerance
        return flags

    def _pose(self) -> Pose:
        return pose_from_dof(self.character, self._root_pos, self._root_rot, self._dof_pos)

    def state(self) -> SimState:
        return SimState(
            pose=self._pose(),
            vel=PoseVelocity(
                self._root_lin_vel.copy(), self._root_ang_vel.copy(), self._dof_vel.copy()
            ),
            contacts=self._contacts(),
            failed=self._failed.copy(),
        )

    def write_state(self, env_indices: np.ndarray, pose: Pose, vel: PoseVelocity) -> None:
        env_indices = np.asarray(env_indices)
        self._root_pos[env_indices] = pose.root_pos
        self._root_rot[env_indices] = pose.root_rot
        self._dof_pos[env_indices] = dof_from_pose(self.character, pose)
        self._root_lin_vel[env_indices] = vel.root_lin_vel
        self._root_ang_vel[env_indices] = vel.root_ang_vel
        self._dof_vel[env_indices] = vel.dof_vel
        self.clear_failed(env_indices)

    def snapshot(self) -> dict:
        return {
            "root_pos": self._root_pos.copy(),
            "root_rot": self._root_rot.copy(),
            "dof_pos": self._dof_pos.copy(),
            "root_lin_vel": self._root_lin_vel.copy(),
            "root_ang_vel": self._root_ang_vel.copy(),
            "dof_vel": self._dof_vel.copy(),
            "failed": self._failed.copy(),
            "rng": copy.deepcopy(self._rng.bit_generator.state),
        }

    def restore(self, snap: dict) -> None:
        self._root_pos = snap["root_pos"].copy()
        self._root_rot = snap["root_rot"].copy()
        self._dof_pos = snap["dof_pos"].copy()
        self._root_lin_vel = snap["root_lin_vel"].copy()
        self._root_ang_vel = snap["root_ang_vel"].copy()
        self._dof_vel = snap["dof_vel"].copy()
        self._failed = snap["failed"].copy()
        self._rng.bit_generator.state = copy.deepcopy(snap["rng"])
