"""Quadrotor rigid-body model with structured (regressor times parameter) disturbances.

The inertial frame has ``e3`` pointing down, so gravity is ``+g e3`` and
altitudes are negative ``z``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .geom import E3, Degenerate, cross, hat, is_rotation, project_so3

G = 9.81

# J from the flip study, kg m^2, as printed (off-diagonals disagree in the 4th digit)
REFERENCE_J_RAW = np.array([
    [5.5711, 0.0618, -0.0251],
    [0.06177, 5.5757, 0.0101],
    [-0.02502, 0.01007, 1.05053],
]) * 1e-2
REFERENCE_J = 0.5 * (REFERENCE_J_RAW + REFERENCE_J_RAW.T)


class IntegrationDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadParams:
    m: float = 0.755
    J: np.ndarray = field(default_factory=lambda: REFERENCE_J.copy())
    d: float = 0.169
    c_tf: float = 0.1056
    g: float = G
    f_max: float = 3.2
    f_min: float = 0.0
    _J_inv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        object.__setattr__(self, "J", J)
        if self.m <= 0 or self.d <= 0 or self.c_tf <= 0 or self.f_max <= 0:
            raise ValueError("m, d, c_tf and f_max must be positive")
        if J.shape != (3, 3):
            raise ValueError("J must be 3x3")
        if np.max(np.abs(J - J.T)) > 1e-12:
            raise ValueError("J must be symmetric")
        if np.linalg.eigvalsh(J)[0] <= 0:
            raise ValueError("J must be positive definite")
        object.__setattr__(self, "_J_inv", np.linalg.inv(J))

    @property
    def J_inv(self) -> np.ndarray:
        return self._J_inv

    @property
    def lam_min(self) -> float:
        return float(np.linalg.eigvalsh(self.J)[0])

    @property
    def lam_max(self) -> float:
        return float(np.linalg.eigvalsh(self.J)[-1])


@dataclass(frozen=True)
class RigidState:
    x: np.ndarray
    v: np.ndarray
    R: np.ndarray
    Omega: np.ndarray

    @classmethod
    def hover(cls, x=(0.0, 0.0, 0.0), R=None) -> "RigidState":
        return cls(np.array(x, dtype=float), np.zeros(3),
                   np.eye(3) if R is None else np.array(R, dtype=float), np.zeros(3))

    def is_valid(self) -> bool:
        return is_rotation(self.R)


@dataclass(frozen=True)
class EstimatorState:
    theta_x: np.ndarray
    theta_R: np.ndarray

    @classmethod
    def zeros(cls, p: int = 3) -> "EstimatorState":
        return cls(np.zeros(p), np.zeros(p))


@dataclass(frozen=True)
class ControlInput:
    f: float
    M: np.ndarray


Regressor = Callable[[RigidState], np.ndarray]


def identity_regressor(s: RigidState) -> np.ndarray:
    return np.eye(3)


@dataclass(frozen=True)
class DisturbanceModel:
    """Force ``W_x(s) @ theta_x`` and body torque ``W_R(s) @ theta_R``."""

    theta_x: np.ndarray
    theta_R: np.ndarray
    W_x: Regressor = identity_regressor
    W_R: Regressor = identity_regressor
    B_Wx: float = 1.0
    B_theta: float = np.inf

    def __post_init__(self):
        object.__setattr__(self, "theta_x", np.asarray(self.theta_x, dtype=float))
        object.__setattr__(self, "theta_R", np.asarray(self.theta_R, dtype=float))
        if (np.linalg.norm(self.theta_x) > self.B_theta
                or np.linalg.norm(self.theta_R) > self.B_theta):
            raise ValueError("true parameters exceed B_theta")

    @property
    def P(self) -> int:
        return self.theta_x.size

    @classmethod
    def none(cls, p: int = 3) -> "DisturbanceModel":
        return cls(np.zeros(p), np.zeros(p))


def eval_disturbance(dist: DisturbanceModel, s: RigidState) -> tuple[np.ndarray, np.ndarray]:
    return dist.W_x(s) @ dist.theta_x, dist.W_R(s) @ dist.theta_R


def dynamics_deriv(s: RigidState, u: ControlInput, dist: DisturbanceModel, p: QuadParams):
    """Return ``(xdot, vdot, Rdot, Omegadot)``."""
    force, torque = eval_disturbance(dist, s)
    Re3 = s.R @ E3
    vdot = p.g * E3 - (u.f / p.m) * Re3 + force / p.m
    Rdot = s.R @ hat(s.Omega)
    JW = p.J @ s.Omega
    Wdot = p.J_inv @ (u.M - cross(s.Omega, JW) + torque)
    return s.v.copy(), vdot, Rdot, Wdot


def _pack(s: RigidState, est: EstimatorState) -> np.ndarray:
    return np.concatenate([s.x, s.v, s.R.ravel(), s.Omega, est.theta_x, est.theta_R])


def _unpack(y: np.ndarray, P: int) -> tuple[RigidState, EstimatorState]:
    s = RigidState(y[0:3], y[3:6], y[6:15].reshape(3, 3), y[15:18])
    est = EstimatorState(y[18:18 + P], y[18 + P:18 + 2 * P])
    return s, est


def step(s: RigidState, est: EstimatorState, u: ControlInput,
         est_rate: tuple[np.ndarray, np.ndarray], dist: DisturbanceModel,
         p: QuadParams, dt: float) -> tuple[RigidState, EstimatorState]:
    """Advance plant and estimator by one RK4 step with inputs held over the step.

    ``est_rate`` is ``(theta_x_dot, theta_R_dot)`` from the adaptive laws. The
    rotation is projected back onto SO(3) afterwards.
    """
    if not 0.0 < dt <= 1e-2:
        raise ValueError(f"dt must lie in (0, 0.01], got {dt}")
    P = est.theta_x.size
    rate = np.concatenate([np.asarray(est_rate[0], float), np.asarray(est_rate[1], float)])

    def f(y):
        st, _ = _unpack(y, P)
        xd, vd, Rd, Wd = dynamics_deriv(st, u, dist, p)
        return np.concatenate([xd, vd, Rd.ravel(), Wd, rate])

    y0 = _pack(s, est)
    k1 = f(y0)
    k2 = f(y0 + 0.5 * dt * k1)
    k3 = f(y0 + 0.5 * dt * k2)
    k4 = f(y0 + dt * k3)
    y1 = y0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(y1)):
        raise IntegrationDiverged("non-finite state after integration step")
    s1, est1 = _unpack(y1, P)
    try:
        R1 = project_so3(s1.R)
    except Degenerate as exc:
        raise IntegrationDiverged(f"attitude left the rotation group: {exc}") from exc
    return replace(s1, R=R1), est1
