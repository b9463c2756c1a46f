import mpmath
import numpy as np
import pytest

from wgn.spectral import inverse, make_grid

ACCEPTANCE_LINES: list[str] = []


def mp_symbol_F(t, power=1.0, dps=50):
    """High-precision F as a function of t = sqrt(mu)|xi|."""
    with mpmath.workdps(dps):
        t = mpmath.mpf(t)
        if t == 0:
            return 1.0
        val = 3 * (t / mpmath.tanh(t) - 1) / t**2
        return float(val ** mpmath.mpf(power))


def band_limited(grid, rng, n_modes):
    """Real field with random coefficients on modes 0..n_modes."""
    coeffs = np.zeros(grid.n_points // 2 + 1, dtype=complex)
    coeffs[0] = rng.normal()
    coeffs[1:n_modes + 1] = rng.normal(size=n_modes) + 1j * rng.normal(size=n_modes)
    return inverse(coeffs, grid)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid128():
    return make_grid(128, 2 * np.pi)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


class TrigPoly:
    """Real trigonometric polynomial ``sum_j Re(c_j exp(i j x))`` on the 2 pi torus.

    Derivatives are evaluated in closed form, with no transforms involved.
    """

    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=complex)

    @classmethod
    def random(cls, rng, n_modes, scale=1.0):
        c = rng.normal(size=n_modes + 1) + 1j * rng.normal(size=n_modes + 1)
        c[0] = c[0].real
        poly = cls(c)
        x = np.linspace(0, 2 * np.pi, 512, endpoint=False)
        return cls(c * scale / np.abs(poly(x)).max())

    def __call__(self, x, order=0):
        j = np.arange(self.coeffs.size)
        terms = self.coeffs * (1j * j) ** order * np.exp(1j * np.outer(x, j))
        return terms.sum(axis=1).real


def classical_gn_reference(x, zeta, b, v, epsilon, beta):
    """Green-Naghdi ``h``, ``T``, ``Q`` and ``Q_b`` expanded by the product rule.

    ``zeta``, ``b`` and ``v`` are ``TrigPoly`` objects, so every derivative
    is exact up to rounding.
    """
    h = 1 + epsilon * zeta(x) - beta * b(x)
    hx = epsilon * zeta(x, 1) - beta * b(x, 1)
    vv, vx, vxx = v(x), v(x, 1), v(x, 2)
    m, m2, m2x = beta * b(x, 1), beta * b(x, 2), beta * b(x, 3)
    T = -h * hx * vx - h**2 * vxx / 3 + hx * m * vv + 0.5 * h * m2 * vv + m**2 * vv
    Q = 2 * h * hx * vx**2 + 4 / 3 * h**2 * vx * vxx
    Qb = h * vx**2 * m + hx * vv**2 * m2 + h * vv * vx * m2 + 0.5 * h * vv**2 * m2x + vv**2 * m2 * m
    return h, T, Q, Qb
