"""Quaternion / exponential-map rotation math.

Conventions used across the whole package:
  - quaternions are arrays [..., 4] ordered (w, x, y, z), unit norm
  - canonical hemisphere is w >= 0 (applied before any exp-map export)
  - exponential maps are arrays [..., 3]: direction = axis, magnitude = angle
    in radians, canonicalized into [0, pi] on export

All functions broadcast over leading batch dimensions and work in float64.
"""

from __future__ import annotations

import numpy as np

QUAT_UNIT_TOL = 1e-6
_SMALL_ANGLE = 1e-8


def _check_finite(x: np.ndarray, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError(f"non-finite {what}")
    return x


def quat_identity(shape=()) -> np.ndarray:
    q = np.zeros(tuple(shape) + (4,), dtype=np.float64)
    q[..., 0] = 1.0
    return q


def quat_normalize(q) -> np.ndarray:
    q = _check_finite(q, "quaternion")
    norm = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(norm < 1e-12):
        raise ValueError("zero-norm quaternion")
    return q / norm


def quat_canonical(q) -> np.ndarray:
    """Flip sign so w >= 0 (both signs encode the same rotation)."""
    q = np.asarray(q, dtype=np.float64)
    return np.where(q[..., :1] < 0.0, -q, q)


def quat_conjugate(q) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    out = q.copy()
    out[..., 1:] *= -1.0
    return out


def quat_mul(a, b) -> np.ndarray:
    """Hamilton product a*b (apply b first, then a, for column vectors)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_rotate(q, v) -> np.ndarray:
    """Rotate vector(s) v by quaternion(s) q."""
    q = np.asarray(q, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    qv = q[..., 1:]
    w = q[..., :1]
    t = 2.0 * np.cross(qv, v)
    return v + w * t + np.cross(qv, t)


def quat_to_matrix(q) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    m = np.empty(q.shape[:-1] + (3, 3), dtype=np.float64)
    m[..., 0, 0] = 1.0 - 2.0 * (y * y + z * z)
    m[..., 0, 1] = 2.0 * (x * y - w * z)
    m[..., 0, 2] = 2.0 * (x * z + w * y)
    m[..., 1, 0] = 2.0 * (x * y + w * z)
    m[..., 1, 1] = 1.0 - 2.0 * (x * x + z * z)
    m[..., 1, 2] = 2.0 * (y * z - w * x)
    m[..., 2, 0] = 2.0 * (x * z - w * y)
    m[..., 2, 1] = 2.0 * (y * z + w * x)
    m[..., 2, 2] = 1.0 - 2.0 * (x * x + y * y)
    return m


def matrix_to_quat(m) -> np.ndarray:
    """Rotation matrix to canonical unit quaternion (Shepperd's method)."""
    m = np.asarray(m, dtype=np.float64)
    single = m.ndim == 2
    m = m.reshape((-1, 3, 3))
    q = np.empty((m.shape[0], 4), dtype=np.float64)
    for i, r in enumerate(m):
        tr = r[0, 0] + r[1, 1] + r[2, 2]
        if tr > 0.0:
            s = np.sqrt(tr + 1.0) * 2.0
            q[i] = [0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s]
        elif r[0, 0] > r[1, 1] and r[0, 0] > r[2, 2]:
            s = np.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
            q[i] = [(r[2, 1] - r[1, 2]) / s, 0.25 * s, (r[0, 1] + r[1, 0]) / s, (r[0, 2] + r[2, 0]) / s]
        elif r[1, 1] > r[2, 2]:
            s = np.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
            q[i] = [(r[0, 2] - r[2, 0]) / s, (r[0, 1] + r[1, 0]) / s, 0.25 * s, (r[1, 2] + r[2, 1]) / s]
        else:
            s = np.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
            q[i] = [(r[1, 0] - r[0, 1]) / s, (r[0, 2] + r[2, 0]) / s, (r[1, 2] + r[2, 1]) / s, 0.25 * s]
    q = quat_canonical(quat_normalize(q))
    return q[0] if single else q


def axis_angle_to_quat(axis, angle) -> np.ndarray:
    axis = np.asarray(axis, dtype=np.float64)
    angle = np.asarray(angle, dtype=np.float64)
    half = 0.5 * angle
    q = np.empty(np.broadcast_shapes(axis.shape[:-1], angle.shape) + (4,), dtype=np.float64)
    q[..., 0] = np.cos(half)
    q[..., 1:] = axis * np.sin(half)[..., None]
    return q


def exp_map_to_quat(v) -> np.ndarray:
    """Exp-map 3-vector to unit quaternion.

    Small angles (< 1e-8 rad) use the first-order series so the axis
    division never blows up.
    """
    v = _check_finite(v, "exponential map")
    angle = np.linalg.norm(v, axis=-1)
    half = 0.5 * angle
    # sin(a/2)/a, series-expanded below the small-angle cutoff
    small = angle < _SMALL_ANGLE
    safe = np.where(small, 1.0, angle)
    scale = np.where(small, 0.5 - angle * angle / 48.0, np.sin(half) / safe)
    q = np.empty(v.shape[:-1] + (4,), dtype=np.float64)
    q[..., 0] = np.cos(half)
    q[..., 1:] = v * scale[..., None]
    return quat_normalize(q)


def quat_to_exp_map(q) -> np.ndarray:
    """Unit quaternion to exp map with magnitude in [0, pi]."""
    q = _check_finite(q, "quaternion")
    norm = np.linalg.norm(q, axis=-1)
    if np.any(np.abs(norm - 1.0) > QUAT_UNIT_TOL):
        raise ValueError("quaternion is not unit norm")
    q = quat_canonical(q / norm[..., None])
    w = np.clip(q[..., 0], -1.0, 1.0)
    angle = 2.0 * np.arccos(w)
    sin_half = np.linalg.norm(q[..., 1:], axis=-1)
    small = sin_half < _SMALL_ANGLE
    safe = np.where(small, 1.0, sin_half)
    scale = np.where(small, 2.0, angle / safe)
    return q[..., 1:] * scale[..., None]


def quat_angle(a, b) -> np.ndarray:
    """Geodesic angle between two rotations, in [0, pi]."""
    d = quat_mul(quat_conjugate(np.asarray(a)), np.asarray(b))
    w = np.clip(np.abs(d[..., 0]), -1.0, 1.0)
    return 2.0 * np.arccos(w)


def slerp(q0, q1, u) -> np.ndarray:
    """Shortest-arc spherical interpolation between unit quaternions.

    Falls back to normalized lerp when the arc is tiny (dot > 1 - 1e-7).
    """
    u_arr = np.asarray(u, dtype=np.float64)
    if np.any(u_arr < 0.0) or np.any(u_arr > 1.0):
        raise ValueError("interpolation parameter outside [0, 1]")
    q0 = np.asarray(q0, dtype=np.float64)
    q1 = np.asarray(q1, dtype=np.float64)
    dot = np.sum(q0 * q1, axis=-1)
    q1 = np.where(dot[..., None] < 0.0, -q1, q1)  # shortest arc
    dot = np.abs(dot)
    theta = np.arccos(np.clip(dot, -1.0, 1.0))
    near = dot > 1.0 - 1e-7
    sin_theta = np.where(near, 1.0, np.sin(theta))
    w0 = np.where(near, 1.0 - u_arr, np.sin((1.0 - u_arr) * theta) / sin_theta)
    w1 = np.where(near, u_arr, np.sin(u_arr * theta) / sin_theta)
    return quat_normalize(w0[..., None] * q0 + w1[..., None] * q1)


_UP_INDEX = {"y": 1, "z": 2}


def heading_angle(q, up_axis: str = "z") -> np.ndarray:
    """Rotation of the character's forward (x) axis about the up axis.

    For y-up (planar) characters heading is identically zero: rotation
    about the out-of-plane z axis is pitch, not yaw, and the character
    has no yaw degree of freedom.
    """
    q = np.asarray(q, dtype=np.float64)
    if up_axis == "y":
        return np.zeros(q.shape[:-1], dtype=np.float64)
    if up_axis != "z":
        raise ValueError(f"unsupported up axis {up_axis!r}")
    fwd = quat_rotate(q, np.array([1.0, 0.0, 0.0]))
    return np.arctan2(fwd[..., 1], fwd[..., 0])


def heading_quat(q, up_axis: str = "z") -> np.ndarray:
    """Pure up-axis rotation carrying the heading part of q."""
    ang = heading_angle(q, up_axis)
    axis = np.zeros(3)
    axis[_UP_INDEX[up_axis]] = 1.0
    return axis_angle_to_quat(axis, ang)


def up_index(up_axis: str) -> int:
    try:
        return _UP_INDEX[up_axis]
    except KeyError:
        raise ValueError(f"unsupported up axis {up_axis!r}") from None


def horizontal_indices(up_axis: str) -> tuple[int, int]:
    u = up_index(up_axis)
    return tuple(i for i in range(3) if i != u)  # type: ignore[return-value]
