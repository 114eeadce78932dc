"""Scalar-first unit quaternion algebra.

Quaternions are plain ``(4,)`` numpy arrays ordered ``(q0, q1, q2, q3)`` with
``q0`` the scalar part. ``q`` always denotes the inertial-to-body rotation, so
``quat_to_dcm(q)`` maps inertial coordinates into body coordinates.
"""
from __future__ import annotations

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n == 0.0:
        raise ValueError("cannot normalize a zero quaternion")
    return q / n


def conjugate(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrix, ``skew(a) @ b == cross(a, b)``."""
    return np.array([[0.0, -v[2], v[1]],
                     [v[2], 0.0, -v[0]],
                     [-v[1], v[0], 0.0]])


def cross(a, b) -> np.ndarray:
    """3-vector cross product; much cheaper than ``np.cross`` for single vectors."""
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


def quat_multiply(a: np.ndarray, b: np.ndarray, renormalize: bool = True) -> np.ndarray:
    """Hamilton product ``a ⊗ b``."""
    a0, av = a[0], np.asarray(a[1:], dtype=float)
    b0, bv = b[0], np.asarray(b[1:], dtype=float)
    out = np.empty(4)
    out[0] = a0 * b0 - av @ bv
    out[1:] = a0 * bv + b0 * av + cross(av, bv)
    return normalize(out) if renormalize else out


def from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return np.concatenate(([np.cos(angle / 2.0)], np.sin(angle / 2.0) * axis))


def quat_to_dcm(q: np.ndarray) -> np.ndarray:
    """Direction cosine matrix C_{B<-I} of the rotation ``q``.

    Composition follows ``quat_to_dcm(a ⊗ b) == quat_to_dcm(b) @ quat_to_dcm(a)``.
    """
    q0, q1, q2, q3 = q
    # homogeneous quadratic form so the analytic Jacobians hold off the unit sphere
    return np.array([
        [q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3, 2 * (q1 * q2 + q0 * q3), 2 * (q1 * q3 - q0 * q2)],
        [2 * (q1 * q2 - q0 * q3), q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3, 2 * (q2 * q3 + q0 * q1)],
        [2 * (q1 * q3 + q0 * q2), 2 * (q2 * q3 - q0 * q1), q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3],
    ])


def dcm_to_quat(C: np.ndarray) -> np.ndarray:
    """Inverse of :func:`quat_to_dcm`; returns the representative with q0 >= 0."""
    R = np.asarray(C, dtype=float).T  # body-to-inertial
    tr = np.trace(R)
    if tr > 0:
        S = 2.0 * np.sqrt(tr + 1.0)
        q = np.array([0.25 * S, (R[2, 1] - R[1, 2]) / S,
                      (R[0, 2] - R[2, 0]) / S, (R[1, 0] - R[0, 1]) / S])
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        S = 2.0 * np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        q = np.array([(R[2, 1] - R[1, 2]) / S, 0.25 * S,
                      (R[0, 1] + R[1, 0]) / S, (R[0, 2] + R[2, 0]) / S])
    elif R[1, 1] > R[2, 2]:
        S = 2.0 * np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        q = np.array([(R[0, 2] - R[2, 0]) / S, (R[0, 1] + R[1, 0]) / S,
                      0.25 * S, (R[1, 2] + R[2, 1]) / S])
    else:
        S = 2.0 * np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        q = np.array([(R[1, 0] - R[0, 1]) / S, (R[0, 2] + R[2, 0]) / S,
                      (R[1, 2] + R[2, 1]) / S, 0.25 * S])
    q = normalize(q)
    return q if q[0] >= 0 else -q


def omega_matrix(w: np.ndarray) -> np.ndarray:
    """4x4 skew-symmetric matrix with ``qdot = 0.5 * omega_matrix(w) @ q``."""
    wx, wy, wz = w
    return np.array([[0.0, -wx, -wy, -wz],
                     [wx, 0.0, wz, -wy],
                     [wy, -wz, 0.0, wx],
                     [wz, wy, -wx, 0.0]])


def xi_matrix(q: np.ndarray) -> np.ndarray:
    """4x3 matrix with ``omega_matrix(w) @ q == xi_matrix(q) @ w``."""
    q0, qv = q[0], np.asarray(q[1:], dtype=float)
    out = np.empty((4, 3))
    out[0] = -qv
    out[1:] = q0 * np.eye(3) + skew(qv)
    return out


def rotate_to_body_jacobian(q: np.ndarray, w: np.ndarray) -> np.ndarray:
    """d(quat_to_dcm(q) @ w)/dq, shape (3, 4)."""
    q0, qv = q[0], np.asarray(q[1:], dtype=float)
    out = np.empty((3, 4))
    out[:, 0] = 2.0 * (q0 * w - cross(qv, w))
    out[:, 1:] = 2.0 * ((qv @ w) * np.eye(3) + np.outer(qv, w) - np.outer(w, qv) + q0 * skew(w))
    return out


def rotate_to_inertial_jacobian(q: np.ndarray, w: np.ndarray) -> np.ndarray:
    """d(quat_to_dcm(q).T @ w)/dq, shape (3, 4)."""
    q0, qv = q[0], np.asarray(q[1:], dtype=float)
    out = np.empty((3, 4))
    out[:, 0] = 2.0 * (q0 * w + cross(qv, w))
    out[:, 1:] = 2.0 * ((qv @ w) * np.eye(3) + np.outer(qv, w) - np.outer(w, qv) - q0 * skew(w))
    return out


def slerp(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    """Geodesic interpolation from ``a`` (t=0) to ``b`` (t=1), output with q0 >= 0."""
    a = normalize(a)
    b = normalize(b)
    dot = float(a @ b)
    if dot < 0.0:
        b, dot = -b, -dot
    if dot > 1.0 - 1e-12:
        out = normalize(a + t * (b - a))
    else:
        theta = np.arccos(min(dot, 1.0))
        out = (np.sin((1 - t) * theta) * a + np.sin(t * theta) * b) / np.sin(theta)
        out = normalize(out)
    return out if out[0] >= 0 else -out


def minimal_rotation(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Attitude whose body axis ``u`` points along the inertial direction ``v``.

    Uses the shortest rotation; the result satisfies ``quat_to_dcm(q).T @ u == v``.
    """
    u = np.asarray(u, dtype=float) / np.linalg.norm(u)
    v = np.asarray(v, dtype=float) / np.linalg.norm(v)
    c = float(u @ v)
    if c < -1.0 + 1e-12:
        # antiparallel: any axis orthogonal to u
        axis = cross(u, [1.0, 0.0, 0.0])
        if np.linalg.norm(axis) < 1e-6:
            axis = cross(u, [0.0, 1.0, 0.0])
        return from_axis_angle(axis, np.pi)
    q = np.concatenate(([1.0 + c], cross(u, v)))
    return normalize(q)


def attitude_error(a: np.ndarray, b: np.ndarray) -> float:
    """Rotation angle (rad) between ``a`` and ``b``, insensitive to sign flips."""
    d = quat_multiply(conjugate(a), b, renormalize=False)
    c = min(abs(d[0]) / np.linalg.norm(d), 1.0)
    return 2.0 * np.arccos(c)
