"""Attitude-mode and position-mode geometric adaptive controllers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .geom import E3, cross, e_omega, e_r, psi
from .model import EstimatorState, QuadParams, RigidState

HEADING_TOL = 1e-6
FREE_FALL_TOL = 1e-6


class FreeFallCommand(ValueError):
    pass


class HeadingDegenerate(ValueError):
    pass


@dataclass(frozen=True)
class ControlGains:
    k_x: float = 6.0
    k_v: float = 3.0
    k_R: float = 0.7
    k_Omega: float = 0.12
    c_1: float = 0.1
    c_2: float = 0.1
    gamma_x: float = 2.0
    gamma_R: float = 2.0
    B_theta: float = 0.5

    def __post_init__(self):
        for name, val in vars(self).items():
            if not val > 0:
                raise ValueError(f"gain {name} must be positive, got {val}")


@dataclass(frozen=True)
class AttitudeCommand:
    R_d: np.ndarray
    Omega_d: np.ndarray
    dOmega_d: np.ndarray


@dataclass(frozen=True)
class PositionCommand:
    x_d: np.ndarray
    dx_d: np.ndarray
    ddx_d: np.ndarray
    b1_d: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    # higher derivatives feed the analytic computed-attitude rates
    d3x_d: np.ndarray = field(default_factory=lambda: np.zeros(3))
    d4x_d: np.ndarray = field(default_factory=lambda: np.zeros(3))


@dataclass(frozen=True)
class ControllerMemory:
    """Finite-difference history for the computed attitude.

    ``ticks`` counts controller evaluations since the last reset.
    """

    R_c: np.ndarray | None = None
    Omega_c: np.ndarray | None = None
    ticks: int = 0


class Diagnostics(NamedTuple):
    e_x: np.ndarray
    e_v: np.ndarray
    e_R: np.ndarray
    e_Omega: np.ndarray
    Psi: float
    R_c: np.ndarray
    Omega_c: np.ndarray
    dOmega_c: np.ndarray


def _feedforward(R, R_ref, Om_ref, dOm_ref, J):
    w = R.T @ (R_ref @ Om_ref)
    return cross(w, J @ w) + J @ (R.T @ (R_ref @ dOm_ref))


def attitude_moment(s: RigidState, cmd: AttitudeCommand, est: EstimatorState,
                    g: ControlGains, p: QuadParams, W_R: np.ndarray) -> np.ndarray:
    eR = e_r(s.R, cmd.R_d)
    eW = e_omega(s.R, s.Omega, cmd.R_d, cmd.Omega_d)
    return (-g.k_R * eR - g.k_Omega * eW - W_R @ est.theta_R
            + _feedforward(s.R, cmd.R_d, cmd.Omega_d, cmd.dOmega_d, p.J))


def attitude_adapt_rate(e_Omega, e_R, W_R, g: ControlGains) -> np.ndarray:
    return g.gamma_R * (np.asarray(W_R).T @ (np.asarray(e_Omega) + g.c_2 * np.asarray(e_R)))


def desired_force(e_x, e_v, est: EstimatorState, cmd: PositionCommand,
                  g: ControlGains, p: QuadParams, W_x) -> np.ndarray:
    """The vector ``A``; the commanded thrust vector ``-f R e3`` equals ``A`` at ``R = R_c``."""
    return (-g.k_x * np.asarray(e_x) - g.k_v * np.asarray(e_v) - W_x @ est.theta_x
            - p.m * p.g * E3 + p.m * np.asarray(cmd.ddx_d))


def _unit_derivs(u, du, ddu):
    """Normalize ``u`` and carry its first two time derivatives along."""
    n = np.linalg.norm(u)
    w = u / n
    dw = du / n - u * (u @ du) / n**3
    ddw = (ddu / n - 2 * du * (u @ du) / n**3 - u * (du @ du + u @ ddu) / n**3
           + 3 * u * (u @ du) ** 2 / n**5)
    return w, dw, ddw


def _frame(b3c, b1d):
    proj = b1d - (b1d @ b3c) * b3c
    n = np.linalg.norm(proj)
    if n <= HEADING_TOL:
        raise HeadingDegenerate("b1_d is parallel to the computed thrust axis")
    b1c = proj / n
    return np.column_stack([b1c, cross(b3c, b1c), b3c])


def computed_attitude(e_x, e_v, est: EstimatorState, cmd: PositionCommand,
                      g: ControlGains, p: QuadParams, W_x) -> np.ndarray:
    A = desired_force(e_x, e_v, est, cmd, g, p, W_x)
    nA = np.linalg.norm(A)
    if nA <= FREE_FALL_TOL:
        raise FreeFallCommand("commanded acceleration matches free fall")
    return _frame(-A / nA, np.asarray(cmd.b1_d, dtype=float))


def computed_attitude_rates(s: RigidState, cmd: PositionCommand, est: EstimatorState,
                            dtheta_x, g: ControlGains, p: QuadParams, W_x):
    """Analytic ``(R_c, Omega_c, dOmega_c)``.

    The velocity-error derivative is predicted from the model with the current
    disturbance estimate in place of the unknown one; the second derivative of
    the estimate and of the regressor are neglected.
    """
    W_x = np.asarray(W_x)
    ex, ev = s.x - cmd.x_d, s.v - cmd.dx_d
    A = desired_force(ex, ev, est, cmd, g, p, W_x)
    if np.linalg.norm(A) <= FREE_FALL_TOL:
        raise FreeFallCommand("commanded acceleration matches free fall")
    b3 = s.R @ E3
    db3 = s.R @ cross(s.Omega, E3)
    f = -A @ b3
    dth = np.zeros_like(est.theta_x) if dtheta_x is None else np.asarray(dtheta_x)
    Wth = W_x @ est.theta_x
    ea = p.g * E3 - (f / p.m) * b3 + Wth / p.m - cmd.ddx_d
    dA = -g.k_x * ev - g.k_v * ea - W_x @ dth + p.m * cmd.d3x_d
    df = -dA @ b3 - A @ db3
    ej = -(df / p.m) * b3 - (f / p.m) * db3 + W_x @ dth / p.m - cmd.d3x_d
    ddA = -g.k_x * ea - g.k_v * ej + p.m * cmd.d4x_d

    u, du, ddu = _unit_derivs(A, dA, ddA)
    b3c, db3c, ddb3c = -u, -du, -ddu
    b1d = np.asarray(cmd.b1_d, dtype=float)
    C = cross(b3c, b1d)
    if np.linalg.norm(C) <= HEADING_TOL:
        raise HeadingDegenerate("b1_d is parallel to the computed thrust axis")
    b2c, db2c, ddb2c = _unit_derivs(C, cross(db3c, b1d), cross(ddb3c, b1d))
    b1c = cross(b2c, b3c)
    db1c = cross(db2c, b3c) + cross(b2c, db3c)
    ddb1c = cross(ddb2c, b3c) + 2 * cross(db2c, db3c) + cross(b2c, ddb3c)

    R_c = np.column_stack([b1c, b2c, b3c])
    dR_c = np.column_stack([db1c, db2c, db3c])
    ddR_c = np.column_stack([ddb1c, ddb2c, ddb3c])
    Om = _vee_skew(R_c.T @ dR_c)
    dOm = _vee_skew(R_c.T @ ddR_c)
    return R_c, Om, dOm


def _vee_skew(m):
    return 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def computed_rates(R_c: np.ndarray, mem: ControllerMemory, dt: float):
    """Backward-difference estimates of ``Omega_c`` and its derivative.

    Returns ``(Omega_c, dOmega_c, new_memory)``. Both rates are zero on the
    first tick after a reset and the derivative is zero on the second.
    """
    if mem.ticks == 0 or mem.R_c is None:
        Om = np.zeros(3)
        dOm = np.zeros(3)
    else:
        Om = _vee_skew(R_c.T @ (R_c - mem.R_c)) / dt
        dOm = np.zeros(3) if mem.ticks < 2 else (Om - mem.Omega_c) / dt
    return Om, dOm, ControllerMemory(R_c.copy(), Om, mem.ticks + 1)


def position_control(s: RigidState, cmd: PositionCommand, est: EstimatorState,
                     mem: ControllerMemory, g: ControlGains, p: QuadParams,
                     W_x: np.ndarray, W_R: np.ndarray, dt: float,
                     dtheta_x=None, rates: str = "analytic"):
    """Thrust and moment for position tracking.

    ``rates`` selects how the computed angular velocity and acceleration are
    obtained: ``"analytic"`` differentiates the desired force through the
    model, ``"finite_difference"`` differences ``R_c`` across controller ticks
    held in ``mem``. ``dtheta_x`` is the current estimate rate, used only by
    the analytic route. Returns ``(f, M, diagnostics, new_memory)``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    ex = s.x - cmd.x_d
    ev = s.v - cmd.dx_d
    A = desired_force(ex, ev, est, cmd, g, p, W_x)
    if rates == "analytic":
        R_c, Om_c, dOm_c = computed_attitude_rates(s, cmd, est, dtheta_x, g, p, W_x)
        mem = ControllerMemory(R_c, Om_c, mem.ticks + 1)
    elif rates == "finite_difference":
        R_c = computed_attitude(ex, ev, est, cmd, g, p, W_x)
        Om_c, dOm_c, mem = computed_rates(R_c, mem, dt)
    else:
        raise ValueError(f"unknown rate scheme {rates!r}")
    f = float(-A @ (s.R @ E3))
    eR = e_r(s.R, R_c)
    eW = e_omega(s.R, s.Omega, R_c, Om_c)
    M = (-g.k_R * eR - g.k_Omega * eW - W_R @ est.theta_R
         + _feedforward(s.R, R_c, Om_c, dOm_c, p.J))
    diag = Diagnostics(ex, ev, eR, eW, psi(s.R, R_c), R_c, Om_c, dOm_c)
    return f, M, diag, mem


def position_adapt_rate(e_x, e_v, est: EstimatorState, W_x, g: ControlGains) -> np.ndarray:
    """Adaptive law for the translational estimate, projected on the ``B_theta`` ball."""
    th = est.theta_x
    drive = np.asarray(W_x).T @ (np.asarray(e_v) + g.c_1 * np.asarray(e_x))
    n = np.linalg.norm(th)
    if n < g.B_theta or th @ drive <= 0:
        return g.gamma_x * drive
    return g.gamma_x * (drive - th * (th @ drive) / (th @ th))


def clamp_estimate(theta: np.ndarray, bound: float) -> np.ndarray:
    """Pull a discretely integrated estimate back onto the ball of radius ``bound``."""
    n = np.linalg.norm(theta)
    if n > bound:
        return theta * (bound / n)
    return theta


def attitude_mode_thrust(s: RigidState, g: ControlGains, p: QuadParams,
                         policy: str = "altitude_hold", value: float | None = None) -> float:
    """Thrust magnitude while tracking an attitude command.

    ``altitude_hold`` damps vertical velocity, scaled by the tilt of ``b3`` and
    zero once the thrust axis points upward; ``constant`` returns ``value``.
    """
    if policy == "constant":
        return float(p.m * p.g if value is None else value)
    if policy != "altitude_hold":
        raise ValueError(f"unknown thrust policy {policy!r}")
    c = float(E3 @ s.R @ E3)
    if c <= 0:
        return 0.0
    return (g.k_v * s.v[2] + p.m * p.g) * c
