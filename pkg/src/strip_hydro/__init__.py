"""Thin-strip Navier-Stokes: scaled anisotropic system, its hydrostatic limit,
horizontal Littlewood-Paley analysis and analyticity-band tracking."""

from .anisotropic import ANSConfig, ANSState, initial_data_scaled, run_ans, step_ans
from .errors import (
    BandExhausted,
    BoundaryError,
    CompatibilityError,
    ConfigError,
    InstabilityError,
    InsufficientSpectrum,
    NumericalError,
    RadiusBandwidthConflict,
    StripHydroError,
    ValidationError,
)
from .grid import Grid, PhysicalField, SpectralField, forward_transform, inverse_transform
from .hydrostatic import HydroConfig, HydroState, initial_hydro, run_hydro, step_hydro
from .littlewood_paley import besov_norm, build_partition
from .tracker import RadiusState

__version__ = "0.1.0"

__all__ = [
    "ANSConfig",
    "ANSState",
    "BandExhausted",
    "BoundaryError",
    "CompatibilityError",
    "ConfigError",
    "Grid",
    "HydroConfig",
    "HydroState",
    "InstabilityError",
    "InsufficientSpectrum",
    "NumericalError",
    "PhysicalField",
    "RadiusBandwidthConflict",
    "RadiusState",
    "SpectralField",
    "StripHydroError",
    "ValidationError",
    "besov_norm",
    "build_partition",
    "forward_transform",
    "initial_data_scaled",
    "initial_hydro",
    "inverse_transform",
    "run_ans",
    "run_hydro",
    "step_ans",
    "step_hydro",
]
