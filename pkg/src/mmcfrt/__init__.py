"""Averaged MMC-HVDC simulator for two-stage AC fault ride-through."""

from .budget import EnergyBudget, EddSizing, size_edd
from .engine import InvariantViolation, RunResult, Scenario, ScenarioError, TimeSeriesLog, run
from .network import FaultSpec
from .params import DEFAULT_CONTROL, DEFAULT_PARAMS, ControlParams, SystemParams

__all__ = [
    "ControlParams",
    "DEFAULT_CONTROL",
    "DEFAULT_PARAMS",
    "EddSizing",
    "EnergyBudget",
    "FaultSpec",
    "InvariantViolation",
    "RunResult",
    "Scenario",
    "ScenarioError",
    "SystemParams",
    "TimeSeriesLog",
    "run",
    "size_edd",
]
