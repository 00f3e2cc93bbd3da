"""Geometric adaptive tracking control of a quadrotor on SE(3)."""

from .ctrl import (AttitudeCommand, ControlGains, ControllerMemory, PositionCommand,
                   attitude_moment, computed_attitude, position_control)
from .gains import DomainConstants, StabilityReport, check_attitude_gains, check_position_gains
from .model import (ControlInput, DisturbanceModel, EstimatorState, QuadParams, RigidState,
                    dynamics_deriv, step)
from .scenario import ScenarioConfig, config_from_dict, load_config
from .sim import RunLog, SummaryMetrics, run_scenario, summarize

__all__ = [
    "AttitudeCommand", "ControlGains", "ControllerMemory", "PositionCommand",
    "attitude_moment", "computed_attitude", "position_control",
    "DomainConstants", "StabilityReport", "check_attitude_gains", "check_position_gains",
    "ControlInput", "DisturbanceModel", "EstimatorState", "QuadParams", "RigidState",
    "dynamics_deriv", "step",
    "ScenarioConfig", "config_from_dict", "load_config",
    "RunLog", "SummaryMetrics", "run_scenario", "summarize",
]
