"""Dispersive operators of the Whitham-Green-Naghdi system and their inversion.

Every product that is fed into the nonlocal derivative ``d/dx F^{1/2}`` is
truncated by the 2/3 rule, and the same truncation is built into
``F^{1/2} d/dx`` on the way in. Both directions then share the single
odd symbol ``i k F^{1/2}(k) 1_{3|j|<N}``, which keeps the discrete elliptic
operator exactly symmetric in the grid inner product.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    Grid,
    dealiased_product,
    forward,
    inverse,
    spectral_derivative,
    symbol_F,
)

MU_MAX = 1.0
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 500
# Roundoff allowance on the closed non-cavitation condition min h >= h0.
CAVITATION_SLACK = 1e-12


class CavitationError(ValueError):
    """Depth fell below the non-cavitation floor."""

    def __init__(self, min_h: float, h0: float):
        super().__init__(f"non-cavitation violated: min h = {min_h:.6g} < h0 = {h0:.6g}")
        self.min_h = min_h
        self.h0 = h0


class EllipticSolveError(RuntimeError):
    def __init__(self, report: "EllipticSolveReport"):
        super().__init__(
            f"elliptic solve did not converge in {report.iterations} iterations "
            f"(relative residual {report.final_residual:.3e})")
        self.report = report


@dataclass(frozen=True)
class PhysParams:
    """Nondimensional parameters ``(mu, epsilon, beta)`` and the depth floor ``h0``.

    ``full_dispersion=False`` replaces ``F^{1/2}`` by the identity, which gives
    the classical Green-Naghdi system.
    """

    mu: float
    epsilon: float
    beta: float
    h0: float = 0.1
    full_dispersion: bool = True
    mu_max: float = MU_MAX

    def __post_init__(self):
        if not (0.0 <= self.mu <= self.mu_max):
            raise ValueError(f"mu must lie in [0, {self.mu_max}]")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if not 0.0 < self.h0 < 1.0:
            raise ValueError("h0 must lie in (0, 1)")

    def classical(self) -> "PhysParams":
        return PhysParams(self.mu, self.epsilon, self.beta, self.h0,
                          full_dispersion=False, mu_max=self.mu_max)


@dataclass(frozen=True, eq=False)
class Bathymetry:
    """Bottom profile ``b`` with its spectral first and second derivatives."""

    grid: Grid
    b: np.ndarray
    db: np.ndarray = field(init=False, repr=False)
    d2b: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if b.shape != (self.grid.n_points,):
            raise ValueError("bathymetry must be sampled on the grid")
        if not np.all(np.isfinite(b)):
            raise ValueError("bathymetry contains non-finite values")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "db", spectral_derivative(b, 1, self.grid))
        object.__setattr__(self, "d2b", spectral_derivative(b, 2, self.grid))

    @classmethod
    def flat(cls, grid: Grid) -> "Bathymetry":
        return cls(grid, np.zeros(grid.n_points))


@dataclass(frozen=True, eq=False)
class State:
    zeta: np.ndarray
    v: np.ndarray
    t: float = 0.0


@dataclass(frozen=True)
class EllipticSolveReport:
    iterations: int
    final_residual: float
    converged: bool


def depth(zeta: np.ndarray, bath: Bathymetry, params: PhysParams) -> np.ndarray:
    return 1.0 + params.epsilon * zeta - params.beta * bath.b


def _require_positive(h: np.ndarray) -> None:
    hmin = float(np.min(h))
    if not hmin > 0.0:
        raise CavitationError(hmin, 0.0)


def _require_floor(h: np.ndarray, h0: float) -> None:
    hmin = float(np.min(h))
    if not hmin >= h0 - CAVITATION_SLACK:
        raise CavitationError(hmin, h0)


def _dispersive_derivative_symbol(grid: Grid, params: PhysParams) -> np.ndarray:
    """``i k F^{1/2}(k)`` on the kept band, zero above it."""
    mu = params.mu if params.full_dispersion else 0.0

    def build():
        k = grid.rwavenumbers
        sym = 1j * k * symbol_F(k, mu, 0.5)
        sym[~grid.dealias_mask] = 0.0
        return sym
    return grid.cached(("iksqrtF", mu), build)


def _dispersive_derivative(f: np.ndarray, grid: Grid, params: PhysParams) -> np.ndarray:
    sym = _dispersive_derivative_symbol(grid, params)
    return inverse(sym * forward(f, grid), grid)


def _h_times_T(h: np.ndarray, bath: Bathymetry, v: np.ndarray, params: PhysParams) -> np.ndarray:
    grid = bath.grid
    D = lambda f: _dispersive_derivative(f, grid, params)  # noqa: E731
    m = params.beta * bath.db
    h2 = h * h
    Dv = D(v)
    out = -D(h2 * h * Dv) / 3.0
    if params.beta:
        out += 0.5 * (D(h2 * m * v) - h2 * m * Dv) + h * m * m * v
    return out


def apply_T(h: np.ndarray, bath: Bathymetry, v: np.ndarray, params: PhysParams) -> np.ndarray:
    """The dispersive operator ``T[h, beta b] v``."""
    _require_positive(h)
    return _h_times_T(h, bath, v, params) / h


def apply_script_T(h: np.ndarray, bath: Bathymetry, v: np.ndarray, params: PhysParams) -> np.ndarray:
    """The elliptic application ``v -> h v + mu h T[h, beta b] v``."""
    _require_positive(h)
    if params.mu == 0.0:
        return h * v
    return h * v + params.mu * _h_times_T(h, bath, v, params)


def _preconditioner_symbol(h: np.ndarray, grid: Grid, params: PhysParams) -> np.ndarray:
    """Inverse symbol of the constant-depth, flat-bottom operator at mean depth."""
    hbar = float(np.mean(h))
    sym = _dispersive_derivative_symbol(grid, params)
    # -(1/3) (ik F^1/2)^2 = k^2 F / 3 on the kept band
    return 1.0 / (hbar + params.mu * hbar**3 * np.abs(sym) ** 2 / 3.0)


def invert_script_T(h: np.ndarray, bath: Bathymetry, f: np.ndarray, params: PhysParams,
                    tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                    x0: np.ndarray | None = None) -> tuple[np.ndarray, EllipticSolveReport]:
    """Solve ``(h + mu h T[h, beta b]) v = f`` by preconditioned conjugate gradients.

    The operator is self-adjoint and coercive under non-cavitation. Convergence
    is declared on the true relative residual ``|A v - f| / |f| <= tol``.
    Non-convergence is reported, not raised.
    """
    _require_floor(h, params.h0)
    if not np.all(np.isfinite(f)):
        raise ValueError("right-hand side contains non-finite values")
    grid = bath.grid
    if params.mu == 0.0:
        return f / h, EllipticSolveReport(0, 0.0, True)
    fnorm = float(np.linalg.norm(f))
    if fnorm == 0.0:
        return np.zeros_like(f), EllipticSolveReport(0, 0.0, True)

    A = lambda u: apply_script_T(h, bath, u, params)  # noqa: E731
    pinv = _preconditioner_symbol(h, grid, params)
    M = lambda r: inverse(pinv * forward(r, grid), grid)  # noqa: E731

    if x0 is None:
        x = np.zeros_like(f)
        r = np.array(f, dtype=float, copy=True)
    else:
        x = np.array(x0, dtype=float, copy=True)
        r = f - A(x)
    res = float(np.linalg.norm(r)) / fnorm
    if res <= tol:
        return x, EllipticSolveReport(0, res, True)
    z = M(r)
    p = z.copy()
    rz = float(np.dot(r, z))
    it = 0
    while it < max_iter:
        it += 1
        Ap = A(p)
        alpha = rz / float(np.dot(p, Ap))
        x += alpha * p
        r -= alpha * Ap
        res = float(np.linalg.norm(r)) / fnorm
        if res <= tol:
            # recursive residuals drift; confirm against the true one
            r = f - A(x)
            res = float(np.linalg.norm(r)) / fnorm
            if res <= tol:
                return x, EllipticSolveReport(it, res, True)
            z = M(r)
            p = z.copy()
            rz = float(np.dot(r, z))
            continue
        z = M(r)
        rz_new = float(np.dot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, EllipticSolveReport(it, res, False)


def _h_times_Q(h: np.ndarray, v: np.ndarray, grid: Grid, params: PhysParams) -> np.ndarray:
    Fv = _dispersive_derivative(v, grid, params)
    return (2.0 / 3.0) * _dispersive_derivative(h**3 * Fv * Fv, grid, params)


def _h_times_Qb(h: np.ndarray, bath: Bathymetry, v: np.ndarray, params: PhysParams) -> np.ndarray:
    grid = bath.grid
    m = params.beta * bath.db
    m2 = params.beta * bath.d2b
    Fv = _dispersive_derivative(v, grid, params)
    v2 = v * v
    out = dealiased_product([h * h, Fv * Fv, m], grid)
    out += 0.5 * _dispersive_derivative(h * h * v2 * m2, grid, params)
    out += dealiased_product([h, v2, m2 * m], grid)
    return out


def quadratic_Q(h: np.ndarray, v: np.ndarray, params: PhysParams, grid: Grid) -> np.ndarray:
    """``(2/(3h)) d/dx F^{1/2} (h^3 (F^{1/2} d/dx v)^2)``."""
    _require_positive(h)
    return _h_times_Q(h, v, grid, params) / h


def quadratic_Qb(h: np.ndarray, bath: Bathymetry, v: np.ndarray, params: PhysParams) -> np.ndarray:
    """Topographic quadratic term ``Q_b``."""
    _require_positive(h)
    return _h_times_Qb(h, bath, v, params) / h


def rhs(state: State, bath: Bathymetry, params: PhysParams, tol: float = DEFAULT_TOL,
        max_iter: int = DEFAULT_MAX_ITER) -> tuple[np.ndarray, np.ndarray, EllipticSolveReport]:
    """Time derivatives ``(d zeta/dt, dv/dt)`` of the system.

    Raises ``CavitationError`` below the depth floor and
    ``EllipticSolveError`` if the inner solve fails.
    """
    grid = bath.grid
    zeta, v = state.zeta, state.v
    h = depth(zeta, bath, params)
    _require_floor(h, params.h0)
    dzeta = -spectral_derivative(dealiased_product([h, v], grid), 1, grid)

    forcing = dealiased_product([h, spectral_derivative(zeta, 1, grid)], grid)
    if params.epsilon and params.mu:
        hq = _h_times_Q(h, v, grid, params)
        if params.beta:
            hq = hq + _h_times_Qb(h, bath, v, params)
        forcing = forcing + params.mu * params.epsilon * hq
    w, report = invert_script_T(h, bath, forcing, params, tol, max_iter)
    if not report.converged:
        raise EllipticSolveError(report)
    dv = -w
    if params.epsilon:
        dv = dv - params.epsilon * dealiased_product([v, spectral_derivative(v, 1, grid)], grid)
    coeffs = forward(dv, grid)
    coeffs[~grid.dealias_mask] = 0.0
    return dzeta, inverse(coeffs, grid), report
