"""Pseudo-spectral Navier-Stokes-Cahn-Hilliard simulator and verification harness."""

__version__ = "0.1.0"

from .errors import ConfigError, ExponentMismatch, NegativePowerOnNonzeroMean, StepDiverged  # noqa: E402
from .spectral import (  # noqa: E402
    Field,
    Grid,
    VectorField,
    dealiased_product,
    fractional_laplacian,
    leray_project,
    lp_norm,
    make_grid,
    sobolev_norm,
)
from .model import ModelParams, State, chemical_potential, double_well, rhs, rhs_split  # noqa: E402
from .integrator import StepControls, cfl_dt, imex_step, integrate, rk4_step  # noqa: E402
from .diagnostics import (  # noqa: E402
    DecayFit,
    DiagnosticsRecord,
    compute_record,
    critical_pair,
    fit_decay,
    negative_norm,
    sigma_target,
    total_energy,
)
from .initial import generate_ic  # noqa: E402

__all__ = [
    "__version__",
    "ConfigError",
    "ExponentMismatch",
    "NegativePowerOnNonzeroMean",
    "StepDiverged",
    "Field",
    "Grid",
    "VectorField",
    "dealiased_product",
    "fractional_laplacian",
    "leray_project",
    "lp_norm",
    "make_grid",
    "sobolev_norm",
    "ModelParams",
    "State",
    "chemical_potential",
    "double_well",
    "rhs",
    "rhs_split",
    "StepControls",
    "cfl_dt",
    "imex_step",
    "integrate",
    "rk4_step",
    "DecayFit",
    "DiagnosticsRecord",
    "compute_record",
    "critical_pair",
    "fit_decay",
    "negative_norm",
    "sigma_target",
    "total_energy",
    "generate_ic",
]
