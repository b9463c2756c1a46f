"""Pseudospectral simulation of the Whitham-Green-Naghdi system over variable bathymetry."""
from .spectral import (
    Grid,
    MultiplierSymbol,
    apply_multiplier,
    dealiased_product,
    make_grid,
    sobolev_norm,
    spectral_derivative,
    symbol_F,
    x_mu_norm,
)
from .operators import (
    Bathymetry,
    CavitationError,
    EllipticSolveError,
    EllipticSolveReport,
    PhysParams,
    State,
    apply_script_T,
    apply_T,
    depth,
    invert_script_T,
    quadratic_Q,
    quadratic_Qb,
    rhs,
)
from .timestepper import RunOutcome, RunStatus, StepConfig, cfl_dt, guard_cavitation, run, step_rk4
from .diagnostics import (
    DiagnosticsRecord,
    dispersion_gn,
    dispersion_table,
    dispersion_ww,
    energy_Es,
    gn_gap,
    y_norm,
)

__version__ = "0.1.0"
