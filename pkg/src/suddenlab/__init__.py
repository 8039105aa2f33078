"""Simulation and verification toolkit for entanglement and Bell-nonlocality sudden death."""

from .channels import KrausChannel, apply, verify_cptp
from .measures import concurrence, negativity
from .nonlocality import optimize_angles
from .scenario import Scenario, ScenarioError, parse_scenario
from .states import DensityMatrix
from .sudden_death import DeathTimeResult, Trajectory, detect_death_time, sweep

__version__ = "0.1.0"

__all__ = [
    "DeathTimeResult",
    "DensityMatrix",
    "KrausChannel",
    "Scenario",
    "ScenarioError",
    "Trajectory",
    "apply",
    "concurrence",
    "detect_death_time",
    "negativity",
    "optimize_angles",
    "parse_scenario",
    "sweep",
    "verify_cptp",
]
