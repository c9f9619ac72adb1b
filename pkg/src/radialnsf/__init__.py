"""Spherically symmetric heat-conductive compressible flow in a ball, solved in
Lagrangian mass coordinates, with entropy, representation and blowup-monitor
diagnostics."""

from .core import (
    FluidState,
    FunctionalReport,
    MassGrid,
    PhysParams,
    ValidationError,
    equilibrium_state,
    validate_params,
    validate_state,
)
from .scheme import DtUnderflow, PositivityLost, SchemeConfig, adaptive_dt, step

__version__ = "0.1.0"

__all__ = [
    "FluidState",
    "FunctionalReport",
    "MassGrid",
    "PhysParams",
    "SchemeConfig",
    "ValidationError",
    "DtUnderflow",
    "PositivityLost",
    "adaptive_dt",
    "equilibrium_state",
    "step",
    "validate_params",
    "validate_state",
]
