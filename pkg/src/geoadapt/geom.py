"""Rotation-group primitives and attitude error functions.

Rotations are plain ``(3, 3)`` numpy arrays mapping body-frame vectors to the
inertial frame. Vectors are ``(3,)`` arrays.
"""

from __future__ import annotations

import numpy as np

ORTHO_TOL = 1e-9
SKEW_TOL = 1e-6
SMALL_ANGLE = 1e-8

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


class NotSkew(ValueError):
    pass


class Degenerate(ValueError):
    pass


def cross(a, b) -> np.ndarray:
    """Cross product of two 3-vectors; much cheaper than ``np.cross`` for single pairs."""
    a0, a1, a2 = a
    b0, b1, b2 = b
    return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])


def hat(v) -> np.ndarray:
    """Skew-symmetric matrix with ``hat(v) @ w == cross(v, w)``."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if np.linalg.norm(m + m.T) > SKEW_TOL:
        raise NotSkew(f"matrix is not skew-symmetric (|m + m^T| = {np.linalg.norm(m + m.T):.3g})")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def skew_part(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return 0.5 * (m - m.T)


def exp_so3(v) -> np.ndarray:
    """Rodrigues exponential of the rotation vector ``v``."""
    v = np.asarray(v, dtype=float)
    th = np.linalg.norm(v)
    K = hat(v)
    if th < SMALL_ANGLE:
        # second-order series of sin(th)/th and (1 - cos th)/th^2
        return np.eye(3) + (1.0 - th**2 / 6.0) * K + (0.5 - th**2 / 24.0) * (K @ K)
    return np.eye(3) + (np.sin(th) / th) * K + ((1.0 - np.cos(th)) / th**2) * (K @ K)


def project_so3(m) -> np.ndarray:
    """Nearest rotation in the Frobenius sense (polar decomposition via SVD)."""
    m = np.asarray(m, dtype=float)
    U, s, Vt = np.linalg.svd(m)
    if s[-1] <= 1e-12 * max(s[0], 1.0):
        raise Degenerate("matrix is rank deficient")
    if np.linalg.det(U @ Vt) < 0:
        raise Degenerate("nearest orthogonal matrix is a reflection")
    return U @ Vt


def is_rotation(r, tol: float = ORTHO_TOL) -> bool:
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3) or not np.all(np.isfinite(r)):
        return False
    return (np.linalg.norm(r.T @ r - np.eye(3)) <= tol
            and abs(np.linalg.det(r) - 1.0) <= tol)


def psi(r, rd) -> float:
    """Attitude error function ``0.5 * tr(I - rd^T r)``, in ``[0, 2]``."""
    return 0.5 * (3.0 - np.trace(rd.T @ r))


def e_r(r, rd) -> np.ndarray:
    """Attitude error vector ``0.5 * (rd^T r - r^T rd)^vee``."""
    a = rd.T @ r
    return 0.5 * np.array([a[2, 1] - a[1, 2], a[0, 2] - a[2, 0], a[1, 0] - a[0, 1]])


def e_omega(r, omega, rd, omega_d) -> np.ndarray:
    return np.asarray(omega, dtype=float) - r.T @ (rd @ np.asarray(omega_d, dtype=float))


def angle_between(a, b) -> float:
    """Angle between two nonzero vectors, accurate for small angles."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.arctan2(np.linalg.norm(np.cross(a, b)), a @ b))
