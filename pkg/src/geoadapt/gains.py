"""Gain-condition checks and Lyapunov monitoring for the adaptive controllers.

All matrix norms are spectral norms. The 2x2 symmetric eigenvalue problems
are solved in closed form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .ctrl import ControlGains, Diagnostics, computed_attitude, desired_force
from .geom import E3
from .model import DisturbanceModel, EstimatorState, QuadParams, RigidState


class OutOfDomain(ValueError):
    pass


@dataclass(frozen=True)
class DomainConstants:
    psi_1: float = 0.9
    psi_2: float = 1.9
    e_x_max: float = 2.0
    B_1: float = 8.15
    B_2: float = 1.27
    B_Wx: float = 1.0
    B_theta: float = 0.5

    def __post_init__(self):
        if not 0 < self.psi_1 < 1:
            raise ValueError("psi_1 must lie in (0, 1)")
        if not 0 < self.psi_2 < 2:
            raise ValueError("psi_2 must lie in (0, 2)")
        for name in ("e_x_max", "B_1", "B_2", "B_Wx", "B_theta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def alpha(self) -> float:
        return math.sqrt(self.psi_1 * (2.0 - self.psi_1))


class Condition(NamedTuple):
    name: str
    lhs: float
    rhs: float
    passed: bool


@dataclass
class StabilityReport:
    conditions: list[Condition] = field(default_factory=list)
    values: dict[str, float] = field(default_factory=dict)
    matrices: dict[str, np.ndarray] = field(default_factory=dict)

    def less(self, name: str, lhs: float, rhs: float) -> None:
        self.conditions.append(Condition(name, float(lhs), float(rhs), bool(lhs < rhs)))

    def positive_definite(self, name: str, m: np.ndarray) -> None:
        self.matrices[name] = m
        self.conditions.append(Condition(f"{name} positive definite", 0.0, min_eig(m),
                                         bool(min_eig(m) > 0)))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name: str) -> Condition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def merge(self, other: "StabilityReport") -> "StabilityReport":
        out = StabilityReport(list(self.conditions), dict(self.values), dict(self.matrices))
        seen = {c.name for c in out.conditions}
        out.conditions += [c for c in other.conditions if c.name not in seen]
        out.values.update(other.values)
        out.matrices.update(other.matrices)
        return out

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "conditions": [{"name": c.name, "lhs": c.lhs, "rhs": c.rhs, "pass": c.passed}
                           for c in self.conditions],
            "values": {k: float(v) for k, v in self.values.items()},
            "matrices": {k: {"matrix": m.tolist(), "min_eig": min_eig(m)}
                         for k, m in self.matrices.items()},
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def sym2_eigs(m: np.ndarray) -> tuple[float, float]:
    """Eigenvalues ``(low, high)`` of a symmetric 2x2 matrix."""
    a, b, d = float(m[0, 0]), float(m[0, 1]), float(m[1, 1])
    mid = 0.5 * (a + d)
    rad = math.hypot(0.5 * (a - d), b)
    return mid - rad, mid + rad


def min_eig(m: np.ndarray) -> float:
    if m.shape == (2, 2):
        return sym2_eigs(m)[0]
    return float(np.linalg.eigvalsh(m)[0])


def spectral_norm2(m: np.ndarray) -> float:
    return math.sqrt(max(sym2_eigs(m.T @ m)[1], 0.0))


def gyro_bound(J: np.ndarray, omega_bound: float) -> float:
    """``B_2 = ||2J - tr(J) I|| * omega_bound``."""
    return float(np.linalg.norm(2.0 * J - np.trace(J) * np.eye(3), 2) * omega_bound)


def c2_ceiling(p: QuadParams, g: ControlGains, B_2: float) -> float:
    lm, lM = p.lam_min, p.lam_max
    return min(math.sqrt(g.k_R * lm) / lM,
               4.0 * g.k_Omega / (8.0 * g.k_R * lM + (g.k_Omega + B_2) ** 2))


def c1_ceiling(p: QuadParams, g: ControlGains, alpha: float) -> float:
    kx, kv, m = g.k_x, g.k_v, p.m
    return min(4.0 * kx * kv * (1 - alpha) ** 2 / (kv**2 * (1 + alpha) ** 2 + 4 * m * kx * (1 - alpha)),
               math.sqrt(kx / m))


def attitude_matrices(p: QuadParams, g: ControlGains, B_2: float, psi_2: float) -> dict:
    c2, kR, kW, lm, lM = g.c_2, g.k_R, g.k_Omega, p.lam_min, p.lam_max
    return {
        "M21": 0.5 * np.array([[kR, -c2 * lM], [-c2 * lM, lm]]),
        "M22": 0.5 * np.array([[2 * kR / (2 - psi_2), c2 * lM], [c2 * lM, lM]]),
        "W2": np.array([[c2 * kR, -0.5 * c2 * (kW + B_2)],
                        [-0.5 * c2 * (kW + B_2), kW - 2 * c2 * lM]]),
    }


def position_matrices(p: QuadParams, g: ControlGains, dom: DomainConstants) -> dict:
    a, c1, kx, kv, m = dom.alpha, g.c_1, g.k_x, g.k_v, p.m
    dist = dom.B_Wx * dom.B_theta + dom.B_1
    mats = attitude_matrices(p, g, dom.B_2, dom.psi_1)
    W1 = np.array([[c1 * kx * (1 - a), -0.5 * c1 * kv * (1 + a)],
                   [-0.5 * c1 * kv * (1 + a), kv * (1 - a) - m * c1]])
    W12 = np.array([[c1 * dist, 0.0], [dist + kx * dom.e_x_max, 0.0]])
    nW12 = spectral_norm2(W12)
    mats.update({
        "M11": 0.5 * np.array([[kx, -m * c1], [-m * c1, m]]),
        "M12": 0.5 * np.array([[kx, m * c1], [m * c1, m]]),
        "W1": W1,
        "W12": W12,
        "W": np.array([[min_eig(W1), -0.5 * nW12], [-0.5 * nW12, min_eig(mats["W2"])]]),
    })
    return mats


def check_attitude_gains(p: QuadParams, g: ControlGains, omega_d_bound: float,
                         psi_2: float = 1.9) -> StabilityReport:
    B_2 = gyro_bound(p.J, omega_d_bound)
    rep = StabilityReport()
    rep.values.update(B_2=B_2, c2_ceiling=c2_ceiling(p, g, B_2),
                      lambda_m=p.lam_min, lambda_M=p.lam_max)
    rep.less("c2 ceiling", g.c_2, rep.values["c2_ceiling"])
    mats = attitude_matrices(p, g, B_2, psi_2)
    for name in ("M21", "M22", "W2"):
        rep.positive_definite(name, mats[name])
    return rep


def check_position_gains(p: QuadParams, g: ControlGains, dom: DomainConstants) -> StabilityReport:
    rep = StabilityReport()
    mats = position_matrices(p, g, dom)
    lw1, lw2 = min_eig(mats["W1"]), min_eig(mats["W2"])
    nW12 = spectral_norm2(mats["W12"])
    rep.values.update(alpha=dom.alpha, B_2=dom.B_2,
                      c1_ceiling=c1_ceiling(p, g, dom.alpha),
                      c2_ceiling=c2_ceiling(p, g, dom.B_2),
                      lambda_m_W1=lw1, lambda_m_W2=lw2, norm_W12=nW12)
    rep.less("c1 ceiling", g.c_1, rep.values["c1_ceiling"])
    rep.less("c2 ceiling", g.c_2, rep.values["c2_ceiling"])
    coupling = nW12**2 / (4 * lw1) if lw1 > 0 else math.inf
    rep.conditions.append(Condition("W2 coupling", lw2, coupling, bool(lw2 > coupling)))
    rep.values["coupling_rhs"] = coupling
    rep.matrices["W12"] = mats["W12"]
    for name in ("W1", "W2", "M11", "M12", "M21", "M22", "W"):
        rep.positive_definite(name, mats[name])
    return rep


class LyapunovSample(NamedTuple):
    V1: float
    V2: float
    V: float
    z1: np.ndarray
    z2: np.ndarray
    decrement_bound: float
    in_domain: bool


def in_domain(diag: Diagnostics, dom: DomainConstants) -> bool:
    if diag.e_x is None:
        return diag.Psi < dom.psi_2
    return diag.Psi < dom.psi_1 and np.linalg.norm(diag.e_x) < dom.e_x_max


def lyapunov_values(diag: Diagnostics, est: EstimatorState, dist: DisturbanceModel,
                    g: ControlGains, p: QuadParams, dom: DomainConstants,
                    mats: dict | None = None, strict: bool = True) -> LyapunovSample:
    """Evaluate the Lyapunov functions at the tracking errors in ``diag``.

    ``diag.e_x is None`` marks attitude mode, where only the rotational part
    is defined and ``V1`` is NaN. With ``strict`` an :class:`OutOfDomain` is
    raised outside the region where the bounds hold; otherwise the sample is
    returned with ``in_domain`` false.
    """
    inside = in_domain(diag, dom)
    if strict and not inside:
        raise OutOfDomain(f"Psi={diag.Psi:.4g} outside the monitored domain")
    eR, eW = diag.e_R, diag.e_Omega
    thR = dist.theta_R - est.theta_R
    V2 = (0.5 * eW @ p.J @ eW + g.k_R * diag.Psi + g.c_2 * eR @ p.J @ eW
          + thR @ thR / (2 * g.gamma_R))
    z2 = np.array([np.linalg.norm(eR), np.linalg.norm(eW)])
    if diag.e_x is None:
        if mats is None:
            mats = attitude_matrices(p, g, dom.B_2, dom.psi_2)
        return LyapunovSample(math.nan, float(V2), math.nan, np.full(2, math.nan), z2,
                              float(-z2 @ mats["W2"] @ z2), inside)
    ex, ev = diag.e_x, diag.e_v
    thx = dist.theta_x - est.theta_x
    V1 = (0.5 * g.k_x * ex @ ex + 0.5 * p.m * ev @ ev + g.c_1 * p.m * ex @ ev
          + thx @ thx / (2 * g.gamma_x))
    z1 = np.array([np.linalg.norm(ex), np.linalg.norm(ev)])
    if mats is None:
        mats = position_matrices(p, g, dom)
    z = np.array([np.linalg.norm(z1), np.linalg.norm(z2)])
    return LyapunovSample(float(V1), float(V2), float(V1 + V2), z1, z2,
                          float(-z @ mats["W"] @ z), inside)


def thrust_axis_misalignment(R: np.ndarray, R_c: np.ndarray) -> np.ndarray:
    """``(e3^T R_c^T R e3) R e3 - R_c e3``, the part of ``b3_c`` normal to ``b3``."""
    b3, b3c = R @ E3, R_c @ E3
    return (b3c @ b3) * b3 - b3c


def coupling_term_X(s: RigidState, est: EstimatorState, cmd, g: ControlGains,
                    p: QuadParams, W_x: np.ndarray) -> np.ndarray:
    """Effect of attitude error on the translational error dynamics."""
    ex, ev = s.x - cmd.x_d, s.v - cmd.dx_d
    A = desired_force(ex, ev, est, cmd, g, p, W_x)
    R_c = computed_attitude(ex, ev, est, cmd, g, p, W_x)
    cos = float(E3 @ R_c.T @ s.R @ E3)
    if cos <= 0:
        raise OutOfDomain("thrust axis is at least 90 degrees from the computed axis")
    f = float(-A @ (s.R @ E3))
    return (f / cos) * thrust_axis_misalignment(s.R, R_c)
