"""Unit-quaternion algebra and quaternion/rotation-matrix conversions.

Quaternions are plain numpy arrays ``[q0, q1, q2, q3]`` (scalar first).
Every public operation returns a renormalized array; inputs are expected
to already be unit norm and a drift beyond ``NORM_TOL`` raises.

Batch variants act on ``(n, 4)`` / ``(n, 3)`` arrays and are what the
dynamics loop uses; the scalar functions are the reference forms.
"""

from __future__ import annotations

import numpy as np

NORM_TOL = 1e-9

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


def quat_normalize(q: np.ndarray) -> np.ndarray:
    """Scale to unit norm. Raises on a (near-)zero quaternion."""
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ValueError("cannot normalize near-zero quaternion")
    return q / n


def _check_unit(q: np.ndarray) -> None:
    drift = abs(np.linalg.norm(q) - 1.0)
    if drift > NORM_TOL:
        raise ValueError(f"quaternion norm drifted by {drift:.3e} (> {NORM_TOL})")


def quat_conj(q: np.ndarray) -> np.ndarray:
    """Conjugate [q0, -q]; equals the inverse for unit quaternions."""
    q = np.asarray(q, dtype=float)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product p ⊗ q of two unit quaternions."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check_unit(p)
    _check_unit(q)
    p0, pv = p[0], p[1:]
    q0, qv = q[0], q[1:]
    out = np.empty(4)
    out[0] = p0 * q0 - pv @ qv
    out[1:] = q0 * pv + p0 * qv + np.cross(pv, qv)
    return quat_normalize(out)


def quat_error(q_d: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Attitude error q_d* ⊗ q, canonicalized to a non-negative scalar part.

    The sign flip keeps the controller on the short rotation arc; an exact
    zero scalar part is left as computed (tie-break).
    """
    e = quat_mul(quat_conj(q_d), q)
    if e[0] < 0.0:
        e = -e
    return e


def quat_to_rot(q: np.ndarray) -> np.ndarray:
    """Rotation matrix of a unit quaternion (body-to-world)."""
    q = np.asarray(q, dtype=float)
    _check_unit(q)
    q0, q1, q2, q3 = q
    return np.array(
        [
            [1 - 2 * (q2 * q2 + q3 * q3), 2 * (q1 * q2 - q0 * q3), 2 * (q1 * q3 + q0 * q2)],
            [2 * (q1 * q2 + q0 * q3), 1 - 2 * (q1 * q1 + q3 * q3), 2 * (q2 * q3 - q0 * q1)],
            [2 * (q1 * q3 - q0 * q2), 2 * (q2 * q3 + q0 * q1), 1 - 2 * (q1 * q1 + q2 * q2)],
        ]
    )


def basic_rotation(axis: str, angle: float) -> np.ndarray:
    """Single-axis rotation matrix R_(axis, angle), axis in {'x','y','z'}."""
    if axis not in _AXIS_INDEX:
        raise ValueError(f"axis must be one of 'x','y','z', got {axis!r}")
    c, s = np.cos(angle), np.sin(angle)
    if axis == "x":
        return np.array([[1.0, 0, 0], [0, c, -s], [0, s, c]])
    if axis == "y":
        return np.array([[c, 0, s], [0, 1.0, 0], [-s, 0, c]])
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])


# --- batch forms used by the simulation loop ---


def quat_normalize_batch(q: np.ndarray) -> np.ndarray:
    """Row-wise normalization of an (n, 4) array."""
    n = np.sqrt(np.einsum("ij,ij->i", q, q))[:, None]
    if np.any(n < 1e-12):
        raise ValueError("cannot normalize near-zero quaternion")
    return q / n


def quat_error_batch(q_d: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise quat_error for (n, 4) arrays (scalar part canonicalized >= 0)."""
    a0 = q_d[:, 0]
    a1, a2, a3 = -q_d[:, 1], -q_d[:, 2], -q_d[:, 3]
    b0, b1, b2, b3 = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    e = np.empty_like(q)
    e[:, 0] = a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3
    e[:, 1] = b0 * a1 + a0 * b1 + a2 * b3 - a3 * b2
    e[:, 2] = b0 * a2 + a0 * b2 + a3 * b1 - a1 * b3
    e[:, 3] = b0 * a3 + a0 * b3 + a1 * b2 - a2 * b1
    e /= np.sqrt(np.einsum("ij,ij->i", e, e))[:, None]
    np.negative(e, where=(e[:, 0] < 0.0)[:, None], out=e)
    return e


def quat_to_rot_batch(q: np.ndarray) -> np.ndarray:
    """(n, 4) unit quaternions -> (n, 3, 3) rotation matrices."""
    q0, q1, q2, q3 = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    r = np.empty((q.shape[0], 3, 3))
    r[:, 0, 0] = 1 - 2 * (q2 * q2 + q3 * q3)
    r[:, 0, 1] = 2 * (q1 * q2 - q0 * q3)
    r[:, 0, 2] = 2 * (q1 * q3 + q0 * q2)
    r[:, 1, 0] = 2 * (q1 * q2 + q0 * q3)
    r[:, 1, 1] = 1 - 2 * (q1 * q1 + q3 * q3)
    r[:, 1, 2] = 2 * (q2 * q3 - q0 * q1)
    r[:, 2, 0] = 2 * (q1 * q3 - q0 * q2)
    r[:, 2, 1] = 2 * (q2 * q3 + q0 * q1)
    r[:, 2, 2] = 1 - 2 * (q1 * q1 + q2 * q2)
    return r


def quat_rate_batch(q: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Kinematics dq/dt = 1/2 q ⊗ [0, omega] for (n, 4) and (n, 3) arrays."""
    q0, q1, q2, q3 = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    o1, o2, o3 = omega[:, 0], omega[:, 1], omega[:, 2]
    dq = np.empty_like(q)
    dq[:, 0] = -0.5 * (q1 * o1 + q2 * o2 + q3 * o3)
    dq[:, 1] = 0.5 * (q0 * o1 + q2 * o3 - q3 * o2)
    dq[:, 2] = 0.5 * (q0 * o2 + q3 * o1 - q1 * o3)
    dq[:, 3] = 0.5 * (q0 * o3 + q1 * o2 - q2 * o1)
    return dq
