"""Equilibrium measures for Riesz s-kernels with radial power-law external fields."""

from .errors import (AccuracyError, ConvergenceError, DomainError, RegimeError, RieszError,
                     SingularityError, UnsupportedRegimeError)
from .kernels import ExternalField, RieszParams
from .analytic import EquilibriumMeasure, solve_equilibrium
from .potentials import frostman_verify
from .discrete import Configuration, MinimizeOptions, minimize, multi_start

__version__ = "0.1.0"

__all__ = [
    "RieszParams", "ExternalField", "EquilibriumMeasure", "solve_equilibrium", "frostman_verify",
    "Configuration", "MinimizeOptions", "minimize", "multi_start", "RieszError", "DomainError",
    "ConvergenceError", "AccuracyError", "SingularityError", "RegimeError",
    "UnsupportedRegimeError",
]
