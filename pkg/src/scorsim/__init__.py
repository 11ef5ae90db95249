"""Discrete-event supply chain simulator with SCOR performance cards."""

from scorsim.errors import ConfigError, RegistrationError, SimulationFault
from scorsim.harness import (
    percent_delta,
    run_replications,
    run_scenario,
    sensitivity_suite,
)
from scorsim.metrics import ScorCard, littles_law_residual
from scorsim.scenario import Perturbation, ScenarioSpec, apply_perturbation

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Perturbation",
    "RegistrationError",
    "ScenarioSpec",
    "ScorCard",
    "SimulationFault",
    "apply_perturbation",
    "littles_law_residual",
    "percent_delta",
    "run_replications",
    "run_scenario",
    "sensitivity_suite",
]
