"""Command generators, flight-mode schedules and scenario configuration.

A scenario is loaded from a JSON document (see README for the schema).
Unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .ctrl import AttitudeCommand, ControlGains, PositionCommand
from .gains import DomainConstants, gyro_bound
from .geom import E1, exp_so3, hat, is_rotation
from .model import (DisturbanceModel, EstimatorState, QuadParams, RigidState,
                    identity_regressor)

ATTITUDE = "attitude"
POSITION = "position"

FLIP_AXIS = (math.sqrt(2) / 2, math.sqrt(2) / 2, 0.0)
LISSAJOUS_START = (0.2, -2.8, -1.2)
LISSAJOUS_ENTRY = (1.0, 0.0, -1.5)
LISSAJOUS_T0 = 8.0


class ConfigInvalid(ValueError):
    pass


class OutOfSchedule(ValueError):
    pass


def _unit(v, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError(f"{what} must be a unit vector")
    return v


# -- generators ---------------------------------------------------------------

def flip_attitude_cmd(t: float, axis=FLIP_AXIS, rate: float = 4 * math.pi) -> AttitudeCommand:
    """Constant-rate rotation about ``axis`` starting from the identity."""
    e = _unit(axis, "flip axis")
    ph = rate * t
    R_d = np.eye(3) + math.sin(ph) * hat(e) + (1 - math.cos(ph)) * (np.outer(e, e) - np.eye(3))
    return AttitudeCommand(R_d, rate * e, np.zeros(3))


def lissajous_position_cmd(t: float, start=LISSAJOUS_START, entry=LISSAJOUS_ENTRY,
                           t0: float = LISSAJOUS_T0, altitude: float = -1.5) -> PositionCommand:
    """Straight line from ``start`` to ``entry`` over ``[0, t0)``, then the figure-eight."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t < t0:
        xo, xi = np.asarray(start, float), np.asarray(entry, float)
        return PositionCommand(xo - (t / t0) * (xo - xi), -(xo - xi) / t0, np.zeros(3), E1.copy())
    s = t - t0
    a = s + math.pi / 2
    return PositionCommand(
        np.array([math.sin(a), math.sin(2 * s), altitude]),
        np.array([math.cos(a), 2 * math.cos(2 * s), 0.0]),
        np.array([-math.sin(a), -4 * math.sin(2 * s), 0.0]),
        E1.copy(),
        np.array([-math.cos(a), -8 * math.cos(2 * s), 0.0]),
        np.array([math.sin(a), 16 * math.sin(2 * s), 0.0]),
    )


def hover_cmd(x_target=(0.0, 0.0, 0.0), b1_d=(1.0, 0.0, 0.0)) -> PositionCommand:
    return PositionCommand(np.array(x_target, dtype=float), np.zeros(3), np.zeros(3),
                           _unit(b1_d, "b1_d"))


def line_cmd(t: float, start, end, t_start: float, t_end: float, b1_d=(1.0, 0.0, 0.0)) -> PositionCommand:
    """Constant-velocity segment from ``start`` (at ``t_start``) to ``end`` (at ``t_end``)."""
    a, b = np.asarray(start, float), np.asarray(end, float)
    T = t_end - t_start
    u = min(max((t - t_start) / T, 0.0), 1.0)
    return PositionCommand(a + u * (b - a), (b - a) / T, np.zeros(3), _unit(b1_d, "b1_d"))


GENERATORS = {
    "flip": ATTITUDE,
    "hover": POSITION,
    "lissajous": POSITION,
    "line": POSITION,
}


# -- schedule -----------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    mode: str
    start: float
    end: float
    generator: str
    params: dict = field(default_factory=dict)

    def command(self, t: float):
        kw = self.params
        if self.generator == "flip":
            return flip_attitude_cmd(t - self.start, **kw)
        if self.generator == "hover":
            return hover_cmd(**kw)
        if self.generator == "lissajous":
            return lissajous_position_cmd(t, **kw)
        if self.generator == "line":
            return line_cmd(t, t_start=self.start, t_end=self.end, **kw)
        raise ConfigInvalid(f"unknown generator {self.generator!r}")


@dataclass(frozen=True)
class ModeSchedule:
    segments: tuple[Segment, ...]

    def __post_init__(self):
        segs = self.segments
        if not segs:
            raise ConfigInvalid("schedule is empty")
        if segs[0].start != 0:
            raise ConfigInvalid("schedule must start at t = 0")
        for a, b in zip(segs, segs[1:]):
            if a.end != b.start:
                raise ConfigInvalid("schedule intervals must be contiguous")
        for s in segs:
            if s.end <= s.start:
                raise ConfigInvalid("schedule interval has non-positive length")
            if s.mode not in (ATTITUDE, POSITION):
                raise ConfigInvalid(f"unknown mode {s.mode!r}")
            if GENERATORS.get(s.generator) != s.mode:
                raise ConfigInvalid(f"generator {s.generator!r} cannot drive {s.mode} mode")

    @property
    def end(self) -> float:
        return self.segments[-1].end

    def index(self, t: float) -> int:
        """Index of the segment containing ``t``; boundaries belong to the later segment."""
        if t < 0 or t > self.end:
            raise OutOfSchedule(f"t = {t} outside [0, {self.end}]")
        for i, s in enumerate(self.segments):
            if t < s.end:
                return i
        return len(self.segments) - 1


def active_command(sched: ModeSchedule, t: float):
    seg = sched.segments[sched.index(t)]
    return seg.mode, seg.command(t)


def flip_schedule(rate: float = 4 * math.pi, axis=FLIP_AXIS, switch: float = 0.375,
                  duration: float = 2.0, target=(0.0, 0.0, 0.0)) -> ModeSchedule:
    return ModeSchedule((
        Segment(ATTITUDE, 0.0, switch, "flip", {"axis": list(axis), "rate": rate}),
        Segment(POSITION, switch, duration, "hover", {"x_target": list(target)}),
    ))


def max_command_accel(sched: ModeSchedule) -> float:
    acc = 0.0
    for s in sched.segments:
        if s.generator == "lissajous":
            acc = max(acc, math.hypot(1.0, 4.0))
    return acc


def max_command_rate(sched: ModeSchedule) -> float:
    return max([abs(s.params.get("rate", 4 * math.pi)) for s in sched.segments
                if s.generator == "flip"] or [0.0])


# -- configuration ------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioConfig:
    params: QuadParams
    gains: ControlGains
    domain: DomainConstants
    disturbance: DisturbanceModel
    initial_state: RigidState
    initial_estimate: EstimatorState
    schedule: ModeSchedule
    dt: float = 1e-3
    duration: float = 2.0
    adaptive: bool = True
    adapt_gate: str = "always"
    rates: str = "analytic"
    thrust_policy: str = "altitude_hold"
    thrust_value: float | None = None
    omega_d_bound: float = 4 * math.pi
    source: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not 0 < self.dt <= 1e-2:
            raise ConfigInvalid("dt must lie in (0, 0.01]")
        if self.duration > self.schedule.end + 1e-12:
            raise ConfigInvalid("duration exceeds the schedule")
        if not is_rotation(self.initial_state.R):
            raise ConfigInvalid("initial attitude is not a rotation")
        if self.adapt_gate not in ("always", "domain"):
            raise ConfigInvalid(f"unknown adaptation gate {self.adapt_gate!r}")
        if self.rates not in ("analytic", "finite_difference"):
            raise ConfigInvalid(f"unknown rate scheme {self.rates!r}")
        if self.thrust_policy not in ("altitude_hold", "constant"):
            raise ConfigInvalid(f"unknown thrust policy {self.thrust_policy!r}")


_TOP_KEYS = {"params", "gains", "domain", "disturbance", "initial_state", "initial_estimate",
             "schedule", "dt", "duration", "adaptive", "adapt_gate", "computed_rates",
             "attitude_thrust", "omega_d_bound"}


def _take(d: dict, allowed: set, where: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigInvalid(f"{where} must be an object")
    extra = set(d) - allowed
    if extra:
        raise ConfigInvalid(f"unknown keys in {where}: {sorted(extra)}")
    return d


def _vec(v, n: int, where: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (n,) or not np.all(np.isfinite(a)):
        raise ConfigInvalid(f"{where} must be {n} finite numbers")
    return a


def config_from_dict(doc: dict[str, Any]) -> ScenarioConfig:
    """Build a validated :class:`ScenarioConfig`; every section except ``schedule`` is optional."""
    doc = _take(doc, _TOP_KEYS, "config")
    if "schedule" not in doc:
        raise ConfigInvalid("config needs a schedule")
    try:
        pd = _take(doc.get("params", {}), {"m", "J", "d", "c_tau_f", "g", "f_max", "f_min"}, "params")
        kw = {k: float(pd[k]) for k in ("m", "d", "g", "f_max") if k in pd}
        if "c_tau_f" in pd:
            kw["c_tf"] = float(pd["c_tau_f"])
        if "f_min" in pd:
            kw["f_min"] = -math.inf if pd["f_min"] is None else float(pd["f_min"])
        if "J" in pd:
            kw["J"] = np.asarray(pd["J"], dtype=float)
        params = QuadParams(**kw)

        segs = []
        for i, sd in enumerate(doc["schedule"]):
            sd = _take(sd, {"mode", "start", "end", "generator", "params"}, f"schedule[{i}]")
            segs.append(Segment(sd["mode"], float(sd["start"]), float(sd["end"]),
                                sd["generator"], dict(sd.get("params", {}))))
        schedule = ModeSchedule(tuple(segs))
        for s in schedule.segments:
            s.command(s.start)  # surfaces bad generator parameters now

        dd = _take(doc.get("disturbance", {}), {"theta_x", "theta_R", "regressor", "B_Wx"},
                   "disturbance")
        if dd.get("regressor", "identity") != "identity":
            raise ConfigInvalid("only the identity regressor is available from config")
        th_x = _vec(dd.get("theta_x", [0, 0, 0]), 3, "theta_x")
        th_R = _vec(dd.get("theta_R", [0, 0, 0]), 3, "theta_R")
        B_Wx = float(dd.get("B_Wx", 1.0))

        B_theta_default = max(1.5 * max(np.linalg.norm(th_x), np.linalg.norm(th_R)), 1e-3)
        gd = _take(doc.get("gains", {}), {"k_x", "k_v", "k_R", "k_Omega", "c_1", "c_2",
                                         "gamma_x", "gamma_R", "B_theta"}, "gains")
        gains = ControlGains(**{"B_theta": B_theta_default, **{k: float(v) for k, v in gd.items()}})

        omega_bound = float(doc.get("omega_d_bound", max_command_rate(schedule) or 4 * math.pi))
        accel = max_command_accel(schedule)
        dm = _take(doc.get("domain", {}), {"psi_1", "psi_2", "e_x_max", "B_1", "B_2", "B_Wx",
                                          "B_theta"}, "domain")
        domain = DomainConstants(**{
            "B_1": 1.1 * params.m * (params.g + accel),
            "B_2": gyro_bound(params.J, omega_bound),
            "B_Wx": B_Wx,
            "B_theta": gains.B_theta,
            **{k: float(v) for k, v in dm.items()},
        })
        dist = DisturbanceModel(th_x, th_R, identity_regressor, identity_regressor,
                                B_Wx=B_Wx, B_theta=domain.B_theta)

        sd = _take(doc.get("initial_state", {}), {"x", "v", "R", "axis_angle", "Omega"},
                   "initial_state")
        if "R" in sd and "axis_angle" in sd:
            raise ConfigInvalid("give either R or axis_angle, not both")
        R0 = (np.asarray(sd["R"], dtype=float) if "R" in sd
              else exp_so3(_vec(sd.get("axis_angle", [0, 0, 0]), 3, "axis_angle")))
        state = RigidState(_vec(sd.get("x", [0, 0, 0]), 3, "x"), _vec(sd.get("v", [0, 0, 0]), 3, "v"),
                           R0, _vec(sd.get("Omega", [0, 0, 0]), 3, "Omega"))

        ed = _take(doc.get("initial_estimate", {}), {"theta_x", "theta_R"}, "initial_estimate")
        est = EstimatorState(_vec(ed.get("theta_x", [0, 0, 0]), 3, "initial theta_x"),
                             _vec(ed.get("theta_R", [0, 0, 0]), 3, "initial theta_R"))

        td = _take(doc.get("attitude_thrust", {}), {"policy", "value"}, "attitude_thrust")
        return ScenarioConfig(
            params=params, gains=gains, domain=domain, disturbance=dist,
            initial_state=state, initial_estimate=est, schedule=schedule,
            dt=float(doc.get("dt", 1e-3)), duration=float(doc.get("duration", schedule.end)),
            adaptive=bool(doc.get("adaptive", True)),
            adapt_gate=doc.get("adapt_gate", "always"),
            rates=doc.get("computed_rates", "analytic"),
            thrust_policy=td.get("policy", "altitude_hold"), thrust_value=td.get("value"),
            omega_d_bound=omega_bound, source=doc,
        )
    except ConfigInvalid:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigInvalid(str(exc)) from exc


def load_config(path) -> ScenarioConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read {path}: {exc}") from exc
    return config_from_dict(doc)


# -- shipped scenarios --------------------------------------------------------

THETA_X = [0.25, 0.125, 0.2]
THETA_R = [0.03, -0.06, 0.09]


def flip_doc(adaptive: bool = True) -> dict:
    return {
        "disturbance": {"theta_x": THETA_X, "theta_R": THETA_R},
        "schedule": [
            {"mode": ATTITUDE, "start": 0.0, "end": 0.375, "generator": "flip",
             "params": {"axis": list(FLIP_AXIS), "rate": 4 * math.pi}},
            {"mode": POSITION, "start": 0.375, "end": 2.0, "generator": "hover",
             "params": {"x_target": [0.0, 0.0, 0.0]}},
        ],
        "dt": 1e-3,
        "duration": 2.0,
        "adaptive": adaptive,
    }


def lissajous_doc(duration: float = 30.0) -> dict:
    return {
        "disturbance": {"theta_x": THETA_X, "theta_R": THETA_R},
        "initial_state": {"x": list(LISSAJOUS_START)},
        "schedule": [{"mode": POSITION, "start": 0.0, "end": duration, "generator": "lissajous"}],
        "dt": 1e-3,
        "duration": duration,
    }


def large_error_doc(angle: float = 2.8, duration: float = 10.0) -> dict:
    return {
        "disturbance": {"theta_x": THETA_X, "theta_R": THETA_R},
        "initial_state": {"axis_angle": [angle, 0.0, 0.0]},
        "schedule": [{"mode": POSITION, "start": 0.0, "end": duration, "generator": "hover"}],
        "dt": 1e-3,
        "duration": duration,
    }


def hover_doc(duration: float = 2.0) -> dict:
    return {
        "schedule": [{"mode": POSITION, "start": 0.0, "end": duration, "generator": "hover"}],
        "duration": duration,
    }
