"""Rotor mixing: total thrust and moment to the four rotor thrusts and back.

Rotor 1 sits on +b1, rotor 2 on +b2, rotor 3 on -b1, rotor 4 on -b2; the
reaction torque of rotor i about b3 is ``(-1)**i * c_tf * f_i``.
"""

from __future__ import annotations

import logging

import numpy as np

from .model import QuadParams

log = logging.getLogger(__name__)


class SingularMixer(ValueError):
    pass


def mixer_matrix(d: float, c_tf: float) -> np.ndarray:
    """Maps ``[f1, f2, f3, f4]`` to ``[f, M1, M2, M3]``."""
    return np.array([
        [1.0, 1.0, 1.0, 1.0],
        [0.0, d, 0.0, -d],
        [-d, 0.0, d, 0.0],
        [-c_tf, c_tf, -c_tf, c_tf],
    ])


def mix(f: float, M, p: QuadParams) -> np.ndarray:
    d, c = p.d, p.c_tf
    if d <= 0 or c <= 0:
        raise SingularMixer("arm length and torque coefficient must be positive")
    M1, M2, M3 = M
    a, r, q, y = 0.25 * f, M1 / (2 * d), M2 / (2 * d), M3 / (4 * c)
    return np.array([a - q - y, a + r + y, a + q - y, a - r + y])


def saturate(t, p: QuadParams) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.clip(t, p.f_min, p.f_max)
    if np.any(t < p.f_min):
        log.debug("rotor thrust below f_min clamped: %s", t)
    return out


def unmix(t, p: QuadParams) -> tuple[float, np.ndarray]:
    u = mixer_matrix(p.d, p.c_tf) @ np.asarray(t, dtype=float)
    return float(u[0]), u[1:]


def realize(f: float, M, p: QuadParams) -> tuple[np.ndarray, float, np.ndarray]:
    """Saturated rotor thrusts and the ``(f, M)`` they actually produce."""
    rotors = saturate(mix(f, M, p), p)
    f_real, M_real = unmix(rotors, p)
    return rotors, f_real, M_real
