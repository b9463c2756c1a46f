"""Randomized property campaigns with machine-readable pass/fail reports.

Each check compares a measured worst-case ratio against a threshold fixed
before the campaign runs; a report passes iff ``worst_ratio <= threshold``.
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .diagnostics import dispersion_ww, gn_gap
from .operators import (
    Bathymetry,
    PhysParams,
    State,
    apply_script_T,
    depth,
    invert_script_T,
)
from .spectral import Grid, apply_multiplier, inverse, l2_inner, l2_norm, make_grid, sobolev_norm, symbol_F, x_mu_norm
from .timestepper import step_rk4


class SweepSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mu_values: List[float] = Field(default_factory=lambda: [1.0, 0.1, 0.01])
    epsilon_values: List[float] = Field(default_factory=lambda: [0.1, 0.5])
    beta_values: List[float] = Field(default_factory=lambda: [0.0, 0.5])
    n_fields: int = Field(100, gt=0)
    seed: int = 0
    band_fraction: float = Field(1.0 / 3.0, gt=0.0, le=2.0 / 3.0)
    n_points: int = 128
    length: float = Field(2.0 * np.pi, gt=0)
    s: float = 2.0
    h0: float = Field(0.1, gt=0.0, lt=1.0)
    threshold_scale: float = Field(2.0, ge=0.0)

    @field_validator("mu_values")
    @classmethod
    def _mu_range(cls, v):
        if not v or any(not 0.0 < m <= 1.0 for m in v):
            raise ValueError("mu values must lie in (0, 1]")
        return v

    @field_validator("epsilon_values", "beta_values")
    @classmethod
    def _unit_range(cls, v):
        if not v or any(not 0.0 <= e <= 1.0 for e in v):
            raise ValueError("values must lie in [0, 1]")
        return v

    def grid(self) -> Grid:
        return make_grid(self.n_points, self.length)


@dataclass
class PropertyReport:
    name: str
    trials: int
    worst_ratio: float
    threshold: float
    passed: bool = field(init=False)
    measured: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.worst_ratio <= self.threshold)

    def to_dict(self) -> dict:
        return asdict(self)


def n_threads() -> int:
    cap = os.environ.get("WGN_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = max(1, min(n, int(cap)))
    return n


def _map(fn: Callable, items: Iterable) -> list:
    items = list(items)
    workers = n_threads()
    if workers == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def random_field(grid: Grid, rng: np.random.Generator, band_fraction: float = 1.0 / 3.0) -> np.ndarray:
    """Real field with unit-normal coefficients on the lowest ``band_fraction`` of modes."""
    nk = grid.n_points // 2 + 1
    m = max(1, int(np.floor(band_fraction * grid.n_points / 2)))
    m = min(m, nk - 1)
    coeffs = np.zeros(nk, dtype=complex)
    coeffs[0] = rng.normal()
    coeffs[1:m + 1] = rng.normal(size=m) + 1j * rng.normal(size=m)
    if 3 * m >= grid.n_points:
        coeffs[3 * np.arange(nk) >= grid.n_points] = 0.0
    return inverse(coeffs, grid)


def _unit(f: np.ndarray) -> np.ndarray:
    return f / np.max(np.abs(f))


# -- symbol estimates ---------------------------------------------------------

def _estimate_symbols(mu: float) -> dict[str, Callable[[np.ndarray], np.ndarray]]:
    """Single-mode quotients whose supremum bounds each norm ratio."""
    rmu = np.sqrt(mu)
    F = lambda k: symbol_F(k, mu)  # noqa: E731
    equiv = lambda k: (1.0 + mu * k**2 * F(k)) / (1.0 + rmu * np.abs(k))  # noqa: E731
    return {
        "norm_equivalence_upper": equiv,
        "norm_equivalence_lower": lambda k: 1.0 / equiv(k),
        "F_minus_half": lambda k: np.sqrt(1.0 / (F(k) * (1.0 + rmu * np.abs(k)))),
        "kill_derivative": lambda k: rmu * F(k) * np.sqrt(1.0 + k**2),
        "kill_half_derivative": lambda k: mu**0.25 * np.sqrt(F(k)) * (1.0 + k**2) ** 0.25,
        "F_half_minus_one": lambda k: np.abs(np.sqrt(F(k)) - 1.0) / (mu * (1.0 + k**2)),
    }


def _estimate_ratios(f: np.ndarray, mu: float, s: float, grid: Grid) -> dict[str, float]:
    F = lambda p: (lambda k: symbol_F(k, mu, p))  # noqa: E731
    hs = sobolev_norm(f, s, grid)
    xs = x_mu_norm(f, s, mu, grid)
    fdx = apply_multiplier(f, lambda k: np.abs(k) * symbol_F(k, mu, 0.5), grid)
    middle = hs**2 + mu * sobolev_norm(fdx, s, grid) ** 2
    h_plus2 = sobolev_norm(f, s + 2, grid)
    fm1 = apply_multiplier(f, lambda k: symbol_F(k, mu, 0.5) - 1.0, grid)
    return {
        "norm_equivalence_upper": middle / xs**2,
        "norm_equivalence_lower": xs**2 / middle,
        "F_minus_half": sobolev_norm(apply_multiplier(f, F(-0.5), grid), s, grid) / xs,
        "kill_derivative": np.sqrt(mu) * sobolev_norm(apply_multiplier(f, F(1.0), grid), s, grid)
        / sobolev_norm(f, s - 1, grid),
        "kill_half_derivative": mu**0.25 * sobolev_norm(apply_multiplier(f, F(0.5), grid), s, grid)
        / sobolev_norm(f, s - 0.5, grid),
        "F_half_minus_one": sobolev_norm(fm1, s, grid) / (mu * h_plus2) if h_plus2 else 0.0,
    }


def _uniform_F_half_bound() -> float:
    """``sup_t (1 - F^{1/2}(t)) / t^2`` scanned on t in (0, 1e3]."""
    t = np.concatenate([np.linspace(1e-4, 10.0, 20001), np.geomspace(10.0, 1e3, 2001)])
    return float(np.max((1.0 - symbol_F(t, 1.0, 0.5)) / t**2))


def check_symbol_estimates(spec: SweepSpec) -> list[PropertyReport]:
    grid = spec.grid()
    k_band = grid.rwavenumbers[grid.dealias_mask]
    reports = []
    uniform_worst = 0.0
    for mu in spec.mu_values:
        rng = np.random.default_rng([spec.seed, int(round(mu * 1e9))])
        fields = [random_field(grid, rng, spec.band_fraction) for _ in range(spec.n_fields)]
        trials = _map(lambda f: _estimate_ratios(f, mu, spec.s, grid), fields)
        for name, quotient in _estimate_symbols(mu).items():
            sup = float(np.max(quotient(k_band)))
            worst = max(t[name] for t in trials)
            if name == "F_half_minus_one":
                uniform_worst = max(uniform_worst, worst)
            reports.append(PropertyReport(f"{name}[mu={mu:g}]", len(trials), float(worst),
                                          spec.threshold_scale * sup, {"symbol_sup": sup}))
    bound = _uniform_F_half_bound()
    reports.append(PropertyReport("F_half_minus_one_uniform_in_mu",
                                  spec.n_fields * len(spec.mu_values), uniform_worst,
                                  spec.threshold_scale * bound, {"symbol_sup": bound}))
    return reports


# -- operator contracts -------------------------------------------------------

SELF_ADJOINT_TOL = 1e-10
COERCIVITY_SLACK = 1e-10
ROUNDTRIP_TOL = 1e-8
SOLVE_TOL = 1e-10
FLAT_MAX_ITER = 2
ROUGH_MAX_ITER = 200
MU0_TOL = 1e-13


def _operator_trial(args):
    grid, params, seed, band = args
    rng = np.random.default_rng(seed)
    zeta = _unit(random_field(grid, rng, band))
    b = _unit(random_field(grid, rng, band))
    # keep min h >= h0 with room to spare
    amp = min(0.5, 0.9 * (1.0 - params.h0) / max(params.epsilon + params.beta, 1e-12))
    bath = Bathymetry(grid, amp * b)
    h = depth(amp * zeta, bath, params)
    u, w, v_true = (random_field(grid, rng, band) for _ in range(3))
    Tu, Tw = apply_script_T(h, bath, u, params), apply_script_T(h, bath, w, params)
    sym = abs(l2_inner(Tu, w, grid) - l2_inner(u, Tw, grid)) / (l2_norm(Tu, grid) * l2_norm(w, grid))
    coer = (params.h0 * l2_norm(u, grid) ** 2 - l2_inner(Tu, u, grid)) / l2_norm(u, grid) ** 2
    f = apply_script_T(h, bath, v_true, params)
    v, rep = invert_script_T(h, bath, f, params, tol=SOLVE_TOL, max_iter=1000)
    rt = l2_norm(v - v_true, grid) / l2_norm(v_true, grid)
    g = random_field(grid, rng, band)
    x, rep_g = invert_script_T(h, bath, g, params, tol=SOLVE_TOL, max_iter=1000)
    contract = l2_norm(apply_script_T(h, bath, x, params) - g, grid) / l2_norm(g, grid)
    # flat bottom, constant depth: the preconditioner is exact
    hc = np.full(grid.n_points, 1.0 + params.epsilon * amp * zeta[0])
    flat = Bathymetry.flat(grid)
    _, rep_flat = invert_script_T(hc, flat, g, params, tol=SOLVE_TOL)
    # mu = 0: pointwise division
    p0 = PhysParams(0.0, params.epsilon, params.beta, params.h0)
    x0, _ = invert_script_T(h, bath, g, p0)
    mu0 = l2_norm(h * x0 - g, grid) / l2_norm(g, grid)
    iters = max(rep.iterations, rep_g.iterations)
    converged = rep.converged and rep_g.converged
    return dict(sym=sym, coer=coer, rt=rt, contract=contract, iters=iters,
                converged=converged, flat_iters=rep_flat.iterations, mu0=mu0)


def check_operator_contracts(spec: SweepSpec) -> list[PropertyReport]:
    grid = spec.grid()
    jobs = []
    for i, (mu, eps, beta) in enumerate(itertools.product(spec.mu_values, spec.epsilon_values,
                                                          spec.beta_values)):
        params = PhysParams(mu, eps, beta, spec.h0)
        for j in range(spec.n_fields):
            jobs.append((grid, params, [spec.seed, i, j], spec.band_fraction))
    results = _map(_operator_trial, jobs)
    n = len(results)
    worst = lambda key: float(max(r[key] for r in results))  # noqa: E731
    not_converged = sum(not r["converged"] for r in results)
    return [
        PropertyReport("self_adjointness", n, worst("sym"), SELF_ADJOINT_TOL),
        PropertyReport("coercivity_witness", n, worst("coer"), COERCIVITY_SLACK),
        PropertyReport("inversion_roundtrip", n, worst("rt"), ROUNDTRIP_TOL),
        PropertyReport("inversion_contract", n, worst("contract"), SOLVE_TOL),
        PropertyReport("flat_bottom_cg_iterations", n, worst("flat_iters"), FLAT_MAX_ITER),
        PropertyReport("rough_cg_iterations", n,
                       worst("iters") if not not_converged else float("inf"), ROUGH_MAX_ITER,
                       {"not_converged": not_converged}),
        PropertyReport("mu_zero_roundtrip", n, worst("mu0"), MU0_TOL),
    ]


# -- convergence orders -------------------------------------------------------

TEMPORAL_ORDER = 4.0
TEMPORAL_BAND = 0.2
GAP_ORDER = 2.0
GAP_BAND = 0.3
SPATIAL_TOL = 1e-9
GAP_MU_VALUES = (4e-2, 2e-2, 1e-2)


def linear_wave(grid: Grid, k: float, mu: float, t: float = 0.0) -> State:
    """Exact right-going solution of the linearized flat-bottom system."""
    omega = dispersion_ww(k, mu)
    zeta = np.cos(k * grid.x - omega * t)
    return State(zeta, (omega / k) * zeta, t)


def linear_mode_errors(dts_per_period: Iterable[int], n_points: int = 64, mode: int = 2,
                       mu: float = 1.0, ref_factor: int = 64) -> tuple[list[float], float]:
    """Errors after one linear period at each ``T/n``, against a ``dt/ref_factor`` run.

    The initial data is the right-going wave ``zeta = cos(kx)``,
    ``v = (omega/k) cos(kx)``. Returns the errors and the reference's
    deviation from the closed-form solution, which after one period is the
    initial data again.
    """
    grid = make_grid(n_points, 2.0 * np.pi)
    bath = Bathymetry.flat(grid)
    params = PhysParams(mu, 0.0, 0.0)
    k = float(mode)
    period = 2.0 * np.pi / dispersion_ww(k, mu)
    init = linear_wave(grid, k, mu)

    def evolve(n: int) -> State:
        st, dt = init, period / n
        for _ in range(n):
            st = step_rk4(st, bath, params, dt)
        return st

    counts = list(dts_per_period)
    ref = evolve(min(counts) * ref_factor)
    errs = [float(np.max(np.abs(evolve(n).zeta - ref.zeta))) for n in counts]
    exact_dev = float(np.max(np.abs(ref.zeta - init.zeta)))
    return errs, exact_dev


def gaussian_over_bump(grid: Grid, amplitude: float = 1.0, width: float = 2.0,
                       bump_center: float = 3.0, bump_width: float = 2.0) -> tuple[State, Bathymetry]:
    """Right-moving Gaussian (``v = zeta``) centred mid-domain above a Gaussian bump."""
    x = grid.x - grid.length / 2.0
    zeta = amplitude * np.exp(-(x / width) ** 2)
    bath = Bathymetry(grid, np.exp(-((x - bump_center) / bump_width) ** 2))
    return State(zeta, zeta.copy()), bath


def gap_orders(mu_values=GAP_MU_VALUES, epsilon: float = 0.1, beta: float = 0.1,
               t_end: float = 1.0, n_points: int = 256, length: float = 40.0,
               dt: float = 0.01) -> tuple[list[float], list[float]]:
    grid = make_grid(n_points, length)
    init, bath = gaussian_over_bump(grid)
    gaps = [gn_gap(init, bath, PhysParams(mu, epsilon, beta), t_end, tol=1e-12, dt=dt)
            for mu in mu_values]
    orders = [float(np.log2(a / b)) / float(np.log2(m0 / m1))
              for a, b, m0, m1 in zip(gaps, gaps[1:], mu_values, mu_values[1:])]
    return gaps, orders


def spatial_refinement(n_points: int = 256, length: float = 40.0, mu: float = 0.01,
                       epsilon: float = 0.1, beta: float = 0.1, t_end: float = 1.0,
                       dt: float = 0.02) -> float:
    """Max difference between N- and 2N-point runs at shared nodes."""
    finals = []
    for n in (n_points, 2 * n_points):
        grid = make_grid(n, length)
        st, bath = gaussian_over_bump(grid)
        params = PhysParams(mu, epsilon, beta)
        for _ in range(int(round(t_end / dt))):
            st = step_rk4(st, bath, params, dt, tol=1e-13)
        finals.append(st)
    coarse, fine = finals
    return float(max(np.max(np.abs(coarse.zeta - fine.zeta[::2])),
                     np.max(np.abs(coarse.v - fine.v[::2]))))


def convergence_orders(spec: SweepSpec | None = None) -> list[PropertyReport]:
    errs, exact_dev = linear_mode_errors([20, 40])
    t_order = float(np.log2(errs[0] / errs[1]))
    gaps, orders = gap_orders()
    spatial = spatial_refinement()
    return [
        PropertyReport("rk4_temporal_order", 1, abs(t_order - TEMPORAL_ORDER), TEMPORAL_BAND,
                       {"order": t_order, "errors": errs, "reference_vs_exact": exact_dev}),
        PropertyReport("gn_gap_mu_order", len(orders),
                       max(abs(o - GAP_ORDER) for o in orders), GAP_BAND,
                       {"mu": list(GAP_MU_VALUES), "gaps": gaps, "orders": orders}),
        PropertyReport("spatial_n_doubling", 1, spatial, SPATIAL_TOL),
    ]
