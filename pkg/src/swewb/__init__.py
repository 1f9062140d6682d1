"""Fully well-balanced finite-volume solver for the 1D shallow water equations."""

from .core import (
    DEFAULT_CONSTANTS,
    ConfigurationError,
    DomainError,
    InvariantViolation,
    PhysicalConstants,
    State,
)
from .experiments import experiment_catalog, get_experiment, run_experiment
from .solver import SCHEMES, SchemeConfig, simulate

__all__ = [
    "DEFAULT_CONSTANTS",
    "ConfigurationError",
    "DomainError",
    "InvariantViolation",
    "PhysicalConstants",
    "SCHEMES",
    "SchemeConfig",
    "State",
    "experiment_catalog",
    "get_experiment",
    "run_experiment",
    "simulate",
]

__version__ = "0.1.0"
