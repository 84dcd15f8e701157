"""Numerical laboratory for Cesàro-Hardy operators, Koopman semigroups and their spectra on L^p[0,1]."""

from __future__ import annotations

__version__ = "0.1.0"

from .funcspace import Grid, GridFunction, LambdaExponent, LebesgueExponent, default_grid
from .specfun import cesaro_number, gamma, gamma_quotient, log_gamma

__all__ = [
    "__version__",
    "Grid",
    "GridFunction",
    "LambdaExponent",
    "LebesgueExponent",
    "default_grid",
    "cesaro_number",
    "gamma",
    "gamma_quotient",
    "log_gamma",
]
