"""Singular integral equation solvers for a semi-infinite crack lying on a
soft imperfect interface between two orthotropic half-planes."""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    InterfracError,
    SolverError,
    ThresholdError,
    ValidationError,
)
from .materials import (
    BimaterialConstants,
    IncompressibleOrthotropicParams,
    InterfaceLaw,
    Loading,
    LoadTerm,
    OrthotropicCompliance,
    TabulatedLoading,
    bimaterial_constants,
    compliance_from_incompressible,
    compliance_from_shear_moduli,
    material_preset,
    validate_self_balance,
)
from .mode3 import Mode3Problem, SolutionProfile, solve_mode3
from .mode12 import InPlaneConstants, in_plane_constants, solve_mode12
from .operators import Grid, build_grid, extend_grid
from .oracle import SpectralConfig, kernel_quadrature_check

__all__ = [
    "BimaterialConstants",
    "ConvergenceError",
    "Grid",
    "IncompressibleOrthotropicParams",
    "InPlaneConstants",
    "InterfaceLaw",
    "InterfracError",
    "Loading",
    "LoadTerm",
    "Mode3Problem",
    "OrthotropicCompliance",
    "SolutionProfile",
    "SolverError",
    "SpectralConfig",
    "TabulatedLoading",
    "ThresholdError",
    "ValidationError",
    "bimaterial_constants",
    "build_grid",
    "compliance_from_incompressible",
    "compliance_from_shear_moduli",
    "extend_grid",
    "in_plane_constants",
    "kernel_quadrature_check",
    "material_preset",
    "solve_mode3",
    "solve_mode12",
    "validate_self_balance",
]
