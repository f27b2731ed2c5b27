"""Bayesian consumption games under real-time electricity pricing.

Equilibrium strategies for selfish, altruistic and welfare-maximizing
consumers under private, action-sharing and broadcast information, the
Gaussian belief filter that links time slots, closed-form demand, utility
and welfare statistics, and a seeded Monte Carlo harness.
"""

from .errors import (
    ConfigurationError,
    DegenerateParameterError,
    InvalidParameterError,
    InvalidPriorError,
    NumericalError,
    RTPGameError,
    SolverError,
)
from .model import (
    Behavior,
    BehaviorConstants,
    Info,
    PreferencePrior,
    PricingPolicy,
    RenewableForecast,
    Scenario,
    SigmaCorrelation,
    SimulationTrace,
    behavior_constants,
    price,
    system_metrics,
    utility,
)
from .network import CommunicationGraph, diameter, is_connected, random_geometric

__version__ = "0.1.0"

__all__ = [
    "Behavior",
    "BehaviorConstants",
    "CommunicationGraph",
    "ConfigurationError",
    "DegenerateParameterError",
    "Info",
    "InvalidParameterError",
    "InvalidPriorError",
    "NumericalError",
    "PreferencePrior",
    "PricingPolicy",
    "RTPGameError",
    "RenewableForecast",
    "Scenario",
    "SigmaCorrelation",
    "SimulationTrace",
    "SolverError",
    "behavior_constants",
    "diameter",
    "is_connected",
    "price",
    "random_geometric",
    "system_metrics",
    "utility",
]
