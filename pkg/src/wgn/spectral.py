"""Periodic grid, real FFTs, Fourier multipliers and discrete Sobolev norms.

Coefficients use the forward-normalized convention
``c_k = (1/N) sum_j f_j exp(-i k x_j)`` so that ``c_0`` is the spatial mean.
Real fields are stored by their half spectrum (``numpy.fft.rfft`` layout).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

# Series of 3 (t coth t - 1) / t**2 in powers of t**2, from the Bernoulli
# expansion of t coth t. Ten terms give < 1e-16 relative error for t < 0.5.
_F_SERIES = np.array([
    1.0,
    -1.0 / 15.0,
    2.0 / 315.0,
    -1.0 / 1575.0,
    2.0 / 31185.0,
    -1382.0 / 212837625.0,
    4.0 / 6081075.0,
    -3617.0 / 54273594375.0,
    87734.0 / 12993098493375.0,
    -349222.0 / 510443155096875.0,
])
SERIES_THRESHOLD = 0.5

MIN_POINTS = 8


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform periodic grid on the torus ``[0, length)``.

    ``wavenumbers`` follows the full FFT layout (``0, 1, ..., -1`` scaled by
    ``2 pi / length``); ``rwavenumbers`` is the nonnegative half used by the
    real transforms.
    """

    n_points: int
    length: float
    dx: float = field(init=False)
    x: np.ndarray = field(init=False, repr=False)
    wavenumbers: np.ndarray = field(init=False, repr=False)
    rwavenumbers: np.ndarray = field(init=False, repr=False)
    dealias_mask: np.ndarray = field(init=False, repr=False)
    _cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        n = self.n_points
        if isinstance(n, bool) or int(n) != n:
            raise ValueError("n_points must be an integer")
        n = int(n)
        if n % 2:
            raise ValueError("n_points must be even")
        if n < MIN_POINTS:
            raise ValueError(f"n_points must be >= {MIN_POINTS}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ValueError("length must be positive")
        length = float(self.length)
        setattr_ = object.__setattr__
        setattr_(self, "n_points", n)
        setattr_(self, "length", length)
        setattr_(self, "dx", length / n)
        setattr_(self, "x", np.arange(n) * (length / n))
        scale = 2.0 * np.pi / length
        setattr_(self, "wavenumbers", np.fft.fftfreq(n, d=1.0 / n) * scale)
        idx = np.arange(n // 2 + 1)
        setattr_(self, "rwavenumbers", idx * scale)
        # 2/3 rule: keep |j| < N/3
        setattr_(self, "dealias_mask", 3 * idx < n)

    def cached(self, key, factory: Callable[[], np.ndarray]) -> np.ndarray:
        """Memoize a spectral array (symbols, masks) keyed on ``key``."""
        try:
            return self._cache[key]
        except KeyError:
            value = factory()
            value.setflags(write=False)
            self._cache[key] = value
            return value


def make_grid(n_points: int, length: float) -> Grid:
    return Grid(n_points, length)


def forward(field_: np.ndarray, grid: Grid) -> np.ndarray:
    """Half-spectrum coefficients with 1/N normalization."""
    return np.fft.rfft(field_, norm="forward")


def inverse(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    return np.fft.irfft(coeffs, n=grid.n_points, norm="forward")


def symbol_F(xi, mu: float, power: float = 1.0):
    """Whitham symbol ``(3/(mu xi^2)) (sqrt(mu) xi / tanh(sqrt(mu) xi) - 1)`` to ``power``.

    Small arguments ``sqrt(mu)|xi| < SERIES_THRESHOLD`` are evaluated by the
    even power series, which removes the singularity at ``xi = 0``.
    """
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    xi_arr = np.asarray(xi, dtype=float)
    t = np.sqrt(mu) * np.abs(xi_arr)
    small = t < SERIES_THRESHOLD
    out = np.empty_like(t)
    ts = t[small] ** 2
    out[small] = np.polyval(_F_SERIES[::-1], ts)
    tl = t[~small]
    out[~small] = 3.0 * (tl / np.tanh(tl) - 1.0) / tl**2
    if power != 1.0:
        out = out**power
    if np.ndim(xi) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class MultiplierSymbol:
    """The Fourier multiplier ``F^power`` for shallow-water parameter ``mu``."""

    power: float
    mu: float

    def __call__(self, xi):
        return symbol_F(xi, self.mu, self.power)


SymbolLike = Union[MultiplierSymbol, Callable[[np.ndarray], np.ndarray], np.ndarray]


def _symbol_values(symbol: SymbolLike, grid: Grid) -> np.ndarray:
    if isinstance(symbol, np.ndarray):
        if symbol.shape != grid.rwavenumbers.shape:
            raise ValueError("symbol array must match the half-spectrum layout")
        return symbol
    if isinstance(symbol, MultiplierSymbol):
        return grid.cached(("F", symbol.mu, symbol.power),
                           lambda: np.asarray(symbol(grid.rwavenumbers)))
    return np.asarray(symbol(grid.rwavenumbers))


def apply_multiplier(field_: np.ndarray, symbol: SymbolLike, grid: Grid) -> np.ndarray:
    """Apply a Fourier multiplier to a real field.

    ``symbol`` is evaluated on the nonnegative wavenumbers, which is exact for
    even real symbols. Arrays are taken as precomputed half-spectrum values.
    """
    return inverse(_symbol_values(symbol, grid) * forward(field_, grid), grid)


def derivative_symbol(grid: Grid, order: int) -> np.ndarray:
    def build():
        sym = (1j * grid.rwavenumbers) ** order
        if order % 2:
            sym[-1] = 0.0
        return sym
    return grid.cached(("d", order), build)


def spectral_derivative(field_: np.ndarray, order: int, grid: Grid) -> np.ndarray:
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    return inverse(derivative_symbol(grid, order) * forward(field_, grid), grid)


def dealias(field_: np.ndarray, grid: Grid) -> np.ndarray:
    """Zero the upper third of the spectrum."""
    coeffs = forward(field_, grid)
    coeffs[~grid.dealias_mask] = 0.0
    return inverse(coeffs, grid)


def dealiased_product(fields: Sequence[np.ndarray], grid: Grid) -> np.ndarray:
    """Pointwise product of 2 to 5 fields followed by one 2/3-rule truncation."""
    if not 2 <= len(fields) <= 5:
        raise ValueError("dealiased_product takes between 2 and 5 factors")
    prod = np.array(fields[0], dtype=float, copy=True)
    for f in fields[1:]:
        prod *= f
    return dealias(prod, grid)


def _full_power_spectrum(field_: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    coeffs = np.fft.fft(field_, norm="forward")
    return grid.wavenumbers, np.abs(coeffs) ** 2


def sobolev_norm(field_: np.ndarray, s: float, grid: Grid) -> float:
    """Discrete ``|f|_{H^s} = |J^s f|_{L^2}``."""
    k, p = _full_power_spectrum(field_, grid)
    return float(np.sqrt(grid.length * np.sum((1.0 + k**2) ** s * p)))


def x_mu_norm(field_: np.ndarray, s: float, mu: float, grid: Grid) -> float:
    """``|f|^2_{X^s_mu} = |f|^2_{H^s} + sqrt(mu) |D^{1/2} f|^2_{H^s}``."""
    k, p = _full_power_spectrum(field_, grid)
    weight = (1.0 + k**2) ** s * (1.0 + np.sqrt(mu) * np.abs(k))
    return float(np.sqrt(grid.length * np.sum(weight * p)))


def l2_inner(f: np.ndarray, g: np.ndarray, grid: Grid) -> float:
    return float(grid.dx * np.dot(f, g))


def l2_norm(f: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(grid.dx * np.dot(f, f)))
