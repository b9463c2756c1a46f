"""Energy functionals, norms and dispersion relations."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .operators import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    Bathymetry,
    PhysParams,
    State,
    apply_script_T,
    depth,
)
from .spectral import apply_multiplier, l2_inner, l2_norm, sobolev_norm, x_mu_norm

IMPROVED_GN = (0.207, 1.0, 0.071)
CLASSICAL_GN = (-1.0, 1.0, 1.0)
DEFAULT_PARAMETER_SETS = (CLASSICAL_GN, IMPROVED_GN)


class DispersionDomainError(ValueError):
    def __init__(self, xi: float, params: tuple):
        super().__init__(f"dispersion relation has no real branch at xi = {xi!r} for "
                         f"(theta, alpha, gamma) = {params}")
        self.xi = xi


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float
    e0: float
    es: float
    min_h: float
    y_norm: float
    cg_iterations: int

    FIELDS = ("t", "mass", "e0", "es", "min_h", "y_norm", "cg_iterations")


def _bessel(f: np.ndarray, s: float, bath: Bathymetry) -> np.ndarray:
    if s == 0:
        return f
    return apply_multiplier(f, lambda k: (1.0 + k**2) ** (s / 2.0), bath.grid)


def energy_Es(state: State, bath: Bathymetry, params: PhysParams, s: float = 2.0) -> float:
    """``(J^s U, S(U) J^s U)`` with ``S(U) = diag(1, h + mu h T[h, beta b])``."""
    from .timestepper import guard_cavitation
    guard_cavitation(state, bath, params)
    grid = bath.grid
    h = depth(state.zeta, bath, params)
    jz = _bessel(state.zeta, s, bath)
    jv = _bessel(state.v, s, bath)
    return l2_norm(jz, grid) ** 2 + l2_inner(jv, apply_script_T(h, bath, jv, params), grid)


def y_norm(state: State, bath: Bathymetry, params: PhysParams, s: float = 2.0) -> float:
    """``|(zeta, v)|_{Y^s_mu}``."""
    grid = bath.grid
    return float(np.hypot(sobolev_norm(state.zeta, s, grid),
                          x_mu_norm(state.v, s, params.mu, grid)))


def mass(state: State) -> float:
    return float(np.mean(state.zeta))


def measure(state: State, bath: Bathymetry, params: PhysParams, s: float = 2.0,
            cg_iterations: int = 0) -> DiagnosticsRecord:
    return DiagnosticsRecord(
        t=float(state.t),
        mass=mass(state),
        e0=energy_Es(state, bath, params, 0.0),
        es=energy_Es(state, bath, params, s),
        min_h=float(np.min(depth(state.zeta, bath, params))),
        y_norm=y_norm(state, bath, params, s),
        cg_iterations=int(cg_iterations),
    )


def _tanh_ratio(t):
    """``tanh(t)/t`` with its series near 0."""
    t = np.abs(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    small = t < 1e-3
    ts = t[small] ** 2
    out[small] = 1.0 - ts / 3.0 + 2.0 * ts**2 / 15.0
    out[~small] = np.tanh(t[~small]) / t[~small]
    return out


def dispersion_ww(xi, mu: float):
    """Linear water-wave frequency ``|xi| sqrt(tanh(sqrt(mu) xi) / (sqrt(mu) xi))``."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    xi_arr = np.asarray(xi, dtype=float)
    out = np.abs(xi_arr) * np.sqrt(_tanh_ratio(np.sqrt(mu) * xi_arr))
    return float(out) if np.ndim(xi) == 0 else out


def dispersion_gn(xi, mu: float, theta: float, alpha: float, gamma: float):
    """Frequency of the three-parameter Green-Naghdi family.

    Raises ``DispersionDomainError`` where the squared frequency is negative
    or a denominator vanishes.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    q = mu * xi_arr**2 / 3.0
    num = (1.0 + (theta + gamma) * q) * (1.0 + (alpha - 1.0) * q)
    den = (1.0 + gamma * q) * (1.0 + (alpha + theta) * q)
    bad = (den <= 0) | (num < 0)
    if np.any(bad):
        raise DispersionDomainError(float(xi_arr[np.argmax(bad)]), (theta, alpha, gamma))
    out = np.abs(xi_arr) * np.sqrt(num / den)
    return float(out[0]) if np.ndim(xi) == 0 else out


def dispersion_columns(parameter_sets: Sequence[tuple]) -> list[str]:
    tags = ["_".join(f"{p:g}" for p in ps) for ps in parameter_sets]
    cols = ["xi", "omega_ww"] + [f"omega_gn_{t}" for t in tags]
    cols += ["omega_ww_over_xi2"] + [f"omega_gn_{t}_over_xi2" for t in tags]
    cols += ["omega_ww_over_xi"] + [f"omega_gn_{t}_over_xi" for t in tags]
    return cols


def dispersion_table(mu: float, xi_grid: Iterable[float],
                     parameter_sets: Sequence[tuple] = DEFAULT_PARAMETER_SETS) -> list[tuple]:
    """Rows of water-wave and Green-Naghdi frequencies, raw and divided by xi^2 and xi.

    Column order follows ``dispersion_columns(parameter_sets)``.
    """
    xi = np.asarray(list(xi_grid), dtype=float)
    if xi.size == 0:
        return []
    ww = dispersion_ww(xi, mu)
    gn = [dispersion_gn(xi, mu, *ps) for ps in parameter_sets]
    with np.errstate(divide="ignore", invalid="ignore"):
        cols = [xi, ww, *gn, ww / xi**2, *(g / xi**2 for g in gn), ww / xi, *(g / xi for g in gn)]
    return [tuple(float(c[i]) for c in cols) for i in range(xi.size)]


def gn_gap(initial: State, bath: Bathymetry, params: PhysParams, t_end: float,
           tol: float = 1e-12, dt: Optional[float] = None, cfl: float = 0.5,
           reference: Optional[PhysParams] = None,
           max_iter: int = DEFAULT_MAX_ITER) -> float:
    """``sup_{t <= t_end} |zeta - zeta_GN|_inf`` between two runs from the same data.

    The runs advance in lockstep with one fixed step, taken from the CFL rule at
    ``t = 0`` unless ``dt`` is given. ``reference`` defaults to the classical
    Green-Naghdi variant of ``params``.
    """
    from .timestepper import cfl_dt, step_rk4

    other = params.classical() if reference is None else reference
    if dt is None:
        dt = cfl_dt(initial, bath, params, cfl)
    n_steps = max(1, int(np.ceil(t_end / dt - 1e-9))) if t_end > 0 else 0
    if n_steps:
        dt = t_end / n_steps
    a = b = initial
    gap = float(np.max(np.abs(a.zeta - b.zeta)))
    for _ in range(n_steps):
        a = step_rk4(a, bath, params, dt, tol, max_iter)
        b = step_rk4(b, bath, other, dt, tol, max_iter)
        gap = max(gap, float(np.max(np.abs(a.zeta - b.zeta))))
    return gap
