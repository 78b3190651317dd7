"""Reduced-coordinate rigid-body dynamics in the x-y plane.

Characters must be planar: up_axis "y", every joint revolute about +-z, all
offsets and COMs in the plane. Generalized coordinates are

  floating base: [base_x, base_y, base_angle, joint_0, ..., joint_{J-1}]
  fixed base:    [joint_0, ..., joint_{J-1}]

The mass matrix is assembled from point Jacobians of the body COMs,

  M(q) = sum_b m_b J_b(q)^T J_b(q) + I_b a_b a_b^T

where J_b maps generalized velocity to the COM's planar velocity and a_b
maps it to the body's angular rate (a constant 0/+-1 selector per body).
Velocity-product terms use d/dt(J_b) qd, whose rotational columns are
S * (cdot_b - wdot_r) with S the 90-degree rotation, so no Christoffel
symbols are formed explicitly. Ground contact is a penalty at the two cap
centers of each body's capsule (origin and 2*COM in body frame): a
spring-damper normal force clamped to be non-adhesive plus a viscous
tangential force capped by the Coulomb cone. Integration is semi-implicit
Euler at sim_freq; vel mode bypasses the solve and imposes joint rates
kinematically.
"""

from __future__ import annotations

import numpy as np

from ..character import CharacterModel
from ..kinematics import Pose, PoseVelocity
from .base import Engine, EngineConfig, EngineConfigError, SimState

_PLANAR_TOL = 1e-9


def _rot2(angle: np.ndarray) -> np.ndarray:
    """(...,) -> (..., 2, 2) rotation matrices."""
    c, s = np.cos(angle), np.sin(angle)
    return np.stack(
        [np.stack([c, -s], axis=-1), np.stack([s, c], axis=-1)], axis=-2
    )


def _perp(v: np.ndarray) -> np.ndarray:
    """90-degree CCW rotation: S @ v for v (..., 2)."""
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


class PlanarEngine(Engine):
    def __init__(self, character: CharacterModel, num_envs: int, config: EngineConfig):
        super().__init__(character, num_envs, config)
        self._check_planar(character, config)
        self.floating = not character.root_fixed
        J = character.num_joints
        B = character.num_bodies
        self.nq = (3 if self.floating else 0) + J
        self._root_height = float(character.extras.get("root_height", 0.0))
        self._g2 = np.asarray(config.gravity[:2], dtype=np.float64)

        self._mass = np.array([b.mass for b in character.bodies], dtype=np.float64)
        self._inertia = np.array([b.inertia for b in character.bodies], dtype=np.float64)
        self._com = np.array([b.com[:2] for b in character.bodies], dtype=np.float64)
        self._offset = np.array(
            [j.local_offset[:2] for j in character.joints], dtype=np.float64
        )
        self._clearance = np.array(
            [b.size[1] if len(b.size) > 1 else 0.0 for b in character.bodies],
            dtype=np.float64,
        )
        self._sign = np.array(
            [1.0 if j.axis[2] >= 0 else -1.0 for j in character.joints], dtype=np.float64
        )
        self._kp = np.array([j.kp for j in character.joints], dtype=np.float64)
        self._kd = np.array([j.kd for j in character.joints], dtype=np.float64)
        self._limit = np.array([j.torque_limit for j in character.joints], dtype=np.float64)

        # rotational coordinates: [base_angle?] + joints; mask[b, r] = 1 when
        # coordinate r rotates body b
        R = (1 if self.floating else 0) + J
        mask = np.zeros((B, R), dtype=np.float64)
        rot_sign = np.ones(R, dtype=np.float64)
        base_rot = 1 if self.floating else 0
        if self.floating:
            mask[:, 0] = 1.0
        children = character.joint_children()
        for j in range(J):
            rot_sign[base_rot + j] = self._sign[j]
            # joint j rotates body j+1 and every descendant of it
            stack = [j + 1]
            while stack:
                body = stack.pop()
                mask[body, base_rot + j] = 1.0
                stack.extend(child + 1 for child in children[body - 1])
        self._mask = mask
        self._rot_sign = rot_sign
        # angular-rate selector rows a_b and the constant rotor inertia term
        a_rows = mask * rot_sign[None, :]
        tr = 2 if self.floating else 0
        A = np.zeros((B, self.nq), dtype=np.float64)
        A[:, tr:] = a_rows
        self._A = A
        self._M_rot = np.einsum("bn,bm,b->nm", A, A, self._inertia)
        self._Jt = None
        if self.floating:
            Jt = np.zeros((B, 2, self.nq), dtype=np.float64)
            Jt[:, 0, 0] = 1.0
            Jt[:, 1, 1] = 1.0
            self._Jt = Jt

        self.q = np.zeros((num_envs, self.nq), dtype=np.float64)
        self.qd = np.zeros((num_envs, self.nq), dtype=np.float64)
        if self.floating:
            self.q[:, 1] = self._root_height

    @staticmethod
    def _check_planar(ch: CharacterModel, config: EngineConfig) -> None:
        if ch.up_axis != "y":
            raise EngineConfigError("planar dynamics requires an up_axis 'y' character")
        if abs(config.gravity[2]) > _PLANAR_TOL:
            raise EngineConfigError(
                "planar dynamics lives in the x-y plane; gravity must have zero z component"
            )
        for j in ch.joints:
            if j.kind != "revolute":
                raise EngineConfigError(f"planar dynamics supports revolute joints only, joint {j.name!r} is {j.kind}")
            if abs(j.axis[0]) > _PLANAR_TOL or abs(j.axis[1]) > _PLANAR_TOL:
                raise EngineConfigError(f"joint {j.name!r} axis must be +-z for planar dynamics")
            if abs(j.local_offset[2]) > _PLANAR_TOL:
                raise EngineConfigError(f"joint {j.name!r} offset leaves the x-y plane")
        for b in ch.bodies:
            if abs(b.com[2]) > _PLANAR_TOL:
                raise EngineConfigError(f"body {b.name!r} COM leaves the x-y plane")

    # -- kinematic sweep -----------------------------------------------------
    def _sweep(self, q: np.ndarray, qd: np.ndarray):
        """Body angles, origins and their rates from generalized state.

        Returns (phi, p, phid, pd) with shapes (E,B), (E,B,2), (E,B), (E,B,2).
        """
        E = q.shape[0]
        B = self.character.num_bodies
        base = 3 if self.floating else 0
        phi = np.zeros((E, B))
        p = np.zeros((E, B, 2))
        phid = np.zeros((E, B))
        pd = np.zeros((E, B, 2))
        if self.floating:
            p[:, 0] = q[:, :2]
            phi[:, 0] = q[:, 2]
            pd[:, 0] = qd[:, :2]
            phid[:, 0] = qd[:, 2]
        else:
            p[:, 0, 1] = self._root_height
        for j, spec in enumerate(self.character.joints):
            parent = spec.parent + 1
            Rp = _rot2(phi[:, parent])
            arm = np.einsum("eij,j->ei", Rp, self._offset[j])
            p[:, j + 1] = p[:, parent] + arm
            pd[:, j + 1] = pd[:, parent] + phid[:, parent, None] * _perp(arm)
            phi[:, j + 1] = phi[:, parent] + self._sign[j] * q[:, base + j]
            phid[:, j + 1] = phid[:, parent] + self._sign[j] * qd[:, base + j]
        return phi, p, phid, pd

    def _point_jacobian(self, pts: np.ndarray, axis_pts: np.ndarray) -> np.ndarray:
        """Jacobian of one point per body: (E,B,2) x (E,R,2) -> (E,B,2,nq)."""
        E, B = pts.shape[:2]
        D = pts[:, :, None, :] - axis_pts[:, None, :, :]
        weighted = self._mask[None, :, :, None] * self._rot_sign[None, None, :, None] * _perp(D)
        cols = weighted.swapaxes(-1, -2)  # (E,B,R,2) -> (E,B,2,R)
        J = np.zeros((E, B, 2, self.nq))
        tr = 2 if self.floating else 0
        if self.floating:
            J[:, :, 0, 0] = 1.0
            J[:, :, 1, 1] = 1.0
        J[:, :, :, tr:] = cols
        return J

    def _axis_points(self, p: np.ndarray, pd: np.ndarray):
        """Positions/velocities of the rotational coordinate axes (E,R,2).

        The base angle rotates about the base origin and joint j about body
        j+1's origin, so for a floating base the axis points are exactly the
        body origins in order; a fixed base drops the root entry.
        """
        if self.floating:
            return p, pd
        return p[:, 1:], pd[:, 1:]

    # -- dynamics --------------------------------------------------------------
    def _joint_torques(self, commands: np.ndarray) -> np.ndarray:
        base = 3 if self.floating else 0
        mode = self.config.control_mode
        qj = self.q[:, base:]
        qdj = self.qd[:, base:]
        if mode == "none":
            return np.zeros_like(qj)
        if mode == "torque":
            return np.clip(commands, -self._limit, self._limit)
        if mode in ("pos", "pd_1d"):
            tau = self._kp * (commands - qj) - self._kd * qdj
            return np.clip(tau, -self._limit, self._limit)
        raise AssertionError(f"unhandled mode {mode}")

    def _contact_forces(self, phi, p, phid, pd, axis_pts):
        """Generalized contact force (E,nq) plus per-body contact flags."""
        E = phi.shape[0]
        B = self.character.num_bodies
        cp = self.config.contact
        ground = self.config.ground_height
        Q = np.zeros((E, self.nq))
        flags = np.zeros((E, B), dtype=bool)
        R = _rot2(phi)
        ends_local = np.stack(
            [np.zeros_like(self._com), 2.0 * self._com], axis=1
        )  # (B, 2pts, 2)
        for k in range(2):
            arm = np.einsum("ebij,bj->ebi", R, ends_local[:, k])
            P = p + arm  # (E,B,2)
            vP = pd + phid[..., None] * _perp(arm)
            pen = (ground + self._clearance[None, :]) - P[..., 1]
            active = pen > 0.0
            flags |= pen > -cp.tolerance
            if not np.any(active):
                continue
            fn = np.maximum(0.0, cp.kn * pen - cp.dn * vP[..., 1])
            fn = np.where(active, fn, 0.0)
            ft = np.clip(-cp.kt * vP[..., 0], -cp.mu * fn, cp.mu * fn)
            f = np.stack([ft, fn], axis=-1)  # (E,B,2)
            Jp = self._point_jacobian(P, axis_pts)
            Q += np.einsum("ebin,ebi->en", Jp, f)
        return Q, flags

    def _dynamics_step(self, commands: np.ndarray, dt: float) -> None:
        phi, p, phid, pd = self._sweep(self.q, self.qd)
        axis_pts, axis_vel = self._axis_points(p, pd)
        Rm = _rot2(phi)
        c = p + np.einsum("ebij,bj->ebi", Rm, self._com)
        cd = pd + phid[..., None] * _perp(c - p)

        J = self._point_jacobian(c, axis_pts)
        M = np.einsum("ebin,ebim,b->enm", J, J, self._mass) + self._M_rot[None]

        # velocity-product term: Jdot qd per body, then project through J^T
        qd_rot = self.qd[:, 2:] if self.floating else self.qd
        Dv = cd[:, :, None, :] - axis_vel[:, None, :, :]
        Jdot_qd = np.einsum(
            "br,r,er,ebri->ebi",
            self._mask,
            self._rot_sign,
            qd_rot,
            _perp(Dv),
        )
        h = np.einsum("ebin,ebi,b->en", J, Jdot_qd, self._mass)

        Qg = np.einsum("ebin,i,b->en", J, self._g2, self._mass)
        Qc, _ = self._contact_forces(phi, p, phid, pd, axis_pts)
        tau = self._joint_torques(commands)
        Qt = np.zeros((self.q.shape[0], self.nq))
        base = 3 if self.floating else 0
        Qt[:, base:] = tau

        rhs = Qt + Qg + Qc - h
        qdd = np.linalg.solve(M, rhs[..., None])[..., 0]
        self.qd = self.qd + dt * qdd
        self.q = self.q + dt * self.qd

    def _step_substeps(self, commands: np.ndarray) -> None:
        dt = 1.0 / self.config.sim_freq
        base = 3 if self.floating else 0
        if self.config.control_mode == "vel":
            for _ in range(self.config.substeps):
                self.qd[:, base:] = commands
                if self.floating:
                    self.q[:, :3] += dt * self.qd[:, :3]
                self.q[:, base:] += dt * commands
            return
        for _ in range(self.config.substeps):
            self._dynamics_step(commands, dt)

    # -- state IO ---------------------------------------------------------------
    def _root_quat(self) -> np.ndarray:
        E = self.q.shape[0]
        quat = np.zeros((E, 4))
        if self.floating:
            half = 0.5 * self.q[:, 2]
            quat[:, 0] = np.cos(half)
            quat[:, 3] = np.sin(half)
        else:
            quat[:, 0] = 1.0
        return quat

    def state(self) -> SimState:
        E = self.q.shape[0]
        base = 3 if self.floating else 0
        root_pos = np.zeros((E, 3))
        root_lin = np.zeros((E, 3))
        root_ang = np.zeros((E, 3))
        if self.floating:
            root_pos[:, :2] = self.q[:, :2]
            root_lin[:, :2] = self.qd[:, :2]
            root_ang[:, 2] = self.qd[:, 2]
        else:
            root_pos[:, 1] = self._root_height
        joint_rot = [self.q[:, base + j].copy() for j in range(self.character.num_joints)]
        phi, p, phid, pd = self._sweep(self.q, self.qd)
        axis_pts, _ = self._axis_points(p, pd)
        _, flags = self._contact_forces(phi, p, phid, pd, axis_pts)
        return SimState(
            pose=Pose(root_pos, self._root_quat(), joint_rot),
            vel=PoseVelocity(root_lin, root_ang, self.qd[:, base:].copy()),
            contacts=flags,
            failed=self._failed.copy(),
        )

    def write_state(self, env_indices: np.ndarray, pose: Pose, vel: PoseVelocity) -> None:
        env_indices = np.asarray(env_indices)
        base = 3 if self.floating else 0
        if self.floating:
            rp = np.asarray(pose.root_pos, dtype=np.float64)
            rr = np.asarray(pose.root_rot, dtype=np.float64)
            self.q[env_indices, 0] = rp[..., 0]
            self.q[env_indices, 1] = rp[..., 1]
            self.q[env_indices, 2] = 2.0 * np.arctan2(rr[..., 3], rr[..., 0])
            lv = np.asarray(vel.root_lin_vel, dtype=np.float64)
            av = np.asarray(vel.root_ang_vel, dtype=np.float64)
            self.qd[env_indices, 0] = lv[..., 0]
            self.qd[env_indices, 1] = lv[..., 1]
            self.qd[env_indices, 2] = av[..., 2]
        for j in range(self.character.num_joints):
            self.q[env_indices, base + j] = np.asarray(pose.joint_rot[j], dtype=np.float64)
        self.qd[env_indices[:, None], base + np.arange(self.character.num_joints)[None, :]] = np.asarray(
            vel.dof_vel, dtype=np.float64
        )
        self.clear_failed(env_indices)

    def snapshot(self) -> dict:
        return {"q": self.q.copy(), "qd": self.qd.copy(), "failed": self._failed.copy()}

    def restore(self, snap: dict) -> None:
        self.q = snap["q"].copy()
        self.qd = snap["qd"].copy()
        self._failed = snap["failed"].copy()

    def mechanical_energy(self) -> np.ndarray:
        """Kinetic plus gravitational potential energy per env (diagnostic)."""
        phi, p, phid, pd = self._sweep(self.q, self.qd)
        axis_pts, _ = self._axis_points(p, pd)
        Rm = _rot2(phi)
        c = p + np.einsum("ebij,bj->ebi", Rm, self._com)
        J = self._point_jacobian(c, axis_pts)
        M = np.einsum("ebin,ebim,b->enm", J, J, self._mass) + self._M_rot[None]
        ke = 0.5 * np.einsum("en,enm,em->e", self.qd, M, self.qd)
        pe = -np.einsum("ebi,i,b->e", c, self._g2, self._mass)
        return ke + pe
