"""Closed-loop simulation runs, CSV run logs and summary metrics."""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .alloc import mix, saturate, unmix
from .ctrl import (ControllerMemory, Diagnostics, FreeFallCommand, HeadingDegenerate,
                   attitude_adapt_rate, attitude_moment, attitude_mode_thrust, clamp_estimate,
                   computed_attitude, position_adapt_rate, position_control)
from .gains import (StabilityReport, attitude_matrices, check_attitude_gains,
                    check_position_gains, in_domain, lyapunov_values, position_matrices)
from .geom import e_omega, e_r, psi
from .model import ControlInput, IntegrationDiverged, step
from .scenario import ATTITUDE, ScenarioConfig

log = logging.getLogger(__name__)

MONOTONE_REL_TOL = 1e-3
MONOTONE_ABS_TOL = 1e-8


class EmptyLog(ValueError):
    pass


def log_columns(P: int = 3) -> list[str]:
    cols = ["t"]
    cols += [f"x{i}" for i in (1, 2, 3)] + [f"v{i}" for i in (1, 2, 3)]
    cols += [f"R{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)]
    cols += [f"Om{i}" for i in (1, 2, 3)]
    cols += ["f_cmd"] + [f"M{i}_cmd" for i in (1, 2, 3)]
    cols += [f"f{i}" for i in (1, 2, 3, 4)]
    for name in ("ex", "ev", "eR", "eW"):
        cols += [f"{name}{i}" for i in (1, 2, 3)]
    cols += ["psi"]
    cols += [f"thx{i}" for i in range(1, P + 1)] + [f"thR{i}" for i in range(1, P + 1)]
    cols += ["V1", "V2", "V", "Vdot_bound", "mode", "in_domain", "saturated"]
    return cols


@dataclass
class RunLog:
    columns: list[str]
    data: np.ndarray
    header: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def block(self, *names: str) -> np.ndarray:
        return self.data[:, [self.columns.index(n) for n in names]]

    def vec(self, prefix: str) -> np.ndarray:
        return self.block(*(f"{prefix}{i}" for i in (1, 2, 3)))

    def norm(self, prefix: str) -> np.ndarray:
        return np.linalg.norm(self.vec(prefix), axis=1)

    def window(self, t0: float, t1: float) -> np.ndarray:
        t = self["t"]
        return (t >= t0 - 1e-12) & (t <= t1 + 1e-12)

    def to_csv(self, path) -> None:
        Path(path).write_text(self.to_csv_text())

    def to_csv_text(self) -> str:
        lines = ["# " + json.dumps(self.header, sort_keys=True), ",".join(self.columns)]
        lines += [",".join(repr(float(v)) for v in row) for row in self.data]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, path) -> "RunLog":
        text = Path(path).read_text().splitlines()
        header = {}
        if text and text[0].startswith("#"):
            header = json.loads(text[0][1:])
            text = text[1:]
        if not text:
            raise EmptyLog(f"{path} has no column header")
        cols = text[0].split(",")
        rows = [[float(v) for v in line.split(",")] for line in text[1:] if line]
        data = np.array(rows, dtype=float).reshape(len(rows), len(cols))
        return cls(cols, data, header)


@dataclass
class SummaryMetrics:
    terminal_ex: float
    terminal_psi: float
    max_psi: float
    max_rotor_thrust: float
    saturation_duty: float
    steady_state_ex: float
    lyapunov_violations: int

    def to_dict(self) -> dict:
        return asdict(self)


def monotonicity_violations(runlog: RunLog, dt: float | None = None) -> np.ndarray:
    """Indices ``k`` where ``V`` grew from sample ``k`` to ``k + 1`` inside the domain.

    Only consecutive position-mode samples that are both inside the monitored
    domain are compared. The allowance is ``1e-3 * |Vdot_bound| * dt + 1e-8``.
    """
    if len(runlog) < 2:
        return np.zeros(0, dtype=int)
    t, V, bound = runlog["t"], runlog["V"], runlog["Vdot_bound"]
    if dt is None:
        dt = float(np.median(np.diff(t)))
    ok = (runlog["mode"] == 1) & (runlog["in_domain"] == 1)
    pair = ok[:-1] & ok[1:]
    dV = np.diff(V)
    allow = MONOTONE_REL_TOL * np.abs(bound[:-1]) * dt + MONOTONE_ABS_TOL
    return np.nonzero(pair & (dV > allow))[0]


def summarize(runlog: RunLog) -> SummaryMetrics:
    n = len(runlog)
    if n == 0:
        raise EmptyLog("run log has no records")
    ex = runlog.norm("ex")
    ex_valid = np.where(np.isnan(ex), 0.0, ex)
    ps = runlog["psi"]
    rotors = runlog.block("f1", "f2", "f3", "f4")
    tail = ex_valid[n - max(1, int(math.ceil(0.1 * n))):]
    return SummaryMetrics(
        terminal_ex=float(ex_valid[-1]),
        terminal_psi=float(ps[-1]),
        max_psi=float(np.max(ps)),
        max_rotor_thrust=float(np.max(rotors)),
        saturation_duty=float(np.mean(runlog["saturated"])),
        steady_state_ex=float(np.mean(tail)),
        lyapunov_violations=int(monotonicity_violations(runlog).size),
    )


def gain_report(config: ScenarioConfig) -> StabilityReport:
    att = check_attitude_gains(config.params, config.gains, config.omega_d_bound,
                               config.domain.psi_2)
    return att.merge(check_position_gains(config.params, config.gains, config.domain))


def config_hash(config: ScenarioConfig) -> str:
    return hashlib.sha256(json.dumps(config.source, sort_keys=True).encode()).hexdigest()


def run_scenario(config: ScenarioConfig) -> tuple[RunLog, SummaryMetrics]:
    """Simulate ``config`` and return the per-step log and its summary.

    Raises :class:`IntegrationDiverged` carrying the partial log as ``.runlog``;
    a controller singularity mid-run is reported the same way.
    """
    p, g, dom, dist = config.params, config.gains, config.domain, config.disturbance
    report = gain_report(config)
    if not report.passed:
        failed = [c.name for c in report.conditions if not c.passed]
        log.warning("gain conditions not met: %s", ", ".join(failed))
    report_json = report.to_json(sort_keys=True)
    header = {
        "config_hash": config_hash(config),
        "gain_report_digest": hashlib.sha256(report_json.encode()).hexdigest(),
        "gains_passed": report.passed,
        "failed_conditions": [c.name for c in report.conditions if not c.passed],
        "dt": config.dt,
        "duration": config.duration,
        "adaptive": config.adaptive,
    }
    pos_mats = position_matrices(p, g, dom)
    att_mats = attitude_matrices(p, g, dom.B_2, dom.psi_2)

    P = dist.P
    cols = log_columns(P)
    n_steps = int(round(config.duration / config.dt))
    rows = np.empty((n_steps + 1, len(cols)))
    zeros_P = np.zeros(P)
    nan3 = np.full(3, np.nan)

    adapting = config.adaptive
    s, est = config.initial_state, config.initial_estimate
    mem = ControllerMemory()
    seg_idx = -1
    k = 0
    try:
        for k in range(n_steps + 1):
            t = k * config.dt
            i = config.schedule.index(min(t, config.schedule.end))
            if i != seg_idx:
                mem = ControllerMemory()
                seg_idx = i
            seg = config.schedule.segments[i]
            cmd = seg.command(t)
            W_x, W_R = dist.W_x(s), dist.W_R(s)

            if seg.mode == ATTITUDE:
                eR = e_r(s.R, cmd.R_d)
                eW = e_omega(s.R, s.Omega, cmd.R_d, cmd.Omega_d)
                ps = psi(s.R, cmd.R_d)
                M = attitude_moment(s, cmd, est, g, p, W_R)
                f = attitude_mode_thrust(s, g, p, config.thrust_policy, config.thrust_value)
                rate_x = zeros_P
                diag = Diagnostics(None, None, eR, eW, ps, cmd.R_d, cmd.Omega_d, cmd.dOmega_d)
                mats = att_mats
                ex = ev = nan3
            else:
                ex, ev = s.x - cmd.x_d, s.v - cmd.dx_d
                rate_x = position_adapt_rate(ex, ev, est, W_x, g)
                if not adapting or (config.adapt_gate == "domain" and not in_domain(
                        _pos_diag(s, cmd, est, g, p, W_x), dom)):
                    rate_x = zeros_P
                f, M, diag, mem = position_control(s, cmd, est, mem, g, p, W_x, W_R, config.dt,
                                                   dtheta_x=rate_x, rates=config.rates)
                eR, eW, ps = diag.e_R, diag.e_Omega, diag.Psi
                mats = pos_mats
            rate_R = attitude_adapt_rate(eW, eR, W_R, g)
            ly = lyapunov_values(diag, est, dist, g, p, dom, mats=mats, strict=False)
            if not adapting or (config.adapt_gate == "domain" and not ly.in_domain):
                rate_R = zeros_P

            raw = mix(f, M, p)
            rotors = saturate(raw, p)
            f_real, M_real = unmix(rotors, p)
            saturated = bool(np.any(rotors != raw))

            rows[k] = np.concatenate([
                [t], s.x, s.v, s.R.ravel(), s.Omega, [f], M, rotors, ex, ev, eR, eW, [ps],
                est.theta_x, est.theta_R,
                [ly.V1, ly.V2, ly.V, ly.decrement_bound,
                 0.0 if seg.mode == ATTITUDE else 1.0, float(ly.in_domain), float(saturated)],
            ])
            if k == n_steps:
                break
            s, est = step(s, est, ControlInput(f_real, M_real), (rate_x, rate_R), dist, p, config.dt)
            est = replace(est, theta_x=clamp_estimate(est.theta_x, g.B_theta))
    except IntegrationDiverged as exc:
        exc.runlog = RunLog(cols, rows[:k + 1].copy(), header)
        raise
    except (FreeFallCommand, HeadingDegenerate) as exc:
        err = IntegrationDiverged(f"controller singular at t = {k * config.dt:.6g}: {exc}")
        err.runlog = RunLog(cols, rows[:k].copy(), header)
        raise err from exc
    runlog = RunLog(cols, rows, header)
    return runlog, summarize(runlog)


def _pos_diag(s, cmd, est, g, p, W_x) -> Diagnostics:
    ex, ev = s.x - cmd.x_d, s.v - cmd.dx_d
    R_c = computed_attitude(ex, ev, est, cmd, g, p, W_x)
    return Diagnostics(ex, ev, None, None, psi(s.R, R_c), R_c, None, None)
