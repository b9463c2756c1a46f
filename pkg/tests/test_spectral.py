import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import band_limited, mp_symbol_F
from wgn.spectral import (
    SERIES_THRESHOLD,
    MultiplierSymbol,
    apply_multiplier,
    dealias,
    dealiased_product,
    forward,
    inverse,
    make_grid,
    sobolev_norm,
    spectral_derivative,
    symbol_F,
    x_mu_norm,
)


class TestGrid:
    def test_wavenumbers_unit_torus(self):
        g = make_grid(8, 2 * np.pi)
        np.testing.assert_allclose(g.wavenumbers, [0, 1, 2, 3, -4, -3, -2, -1], atol=1e-15)

    def test_dx(self):
        g = make_grid(16, 1.0)
        assert g.dx == 0.0625
        assert g.dx * g.n_points == pytest.approx(g.length, rel=1e-15)

    @pytest.mark.parametrize("n, length, msg", [
        (7, 1.0, "n_points must be even"),
        (6, 1.0, ">= 8"),
        (16, 0.0, "length must be positive"),
        (16, -2.0, "length must be positive"),
    ])
    def test_rejects_bad_input(self, n, length, msg):
        with pytest.raises(ValueError, match=msg):
            make_grid(n, length)

    def test_dealias_mask_keeps_lower_two_thirds(self):
        g = make_grid(12, 2 * np.pi)
        # |j| < 4 kept
        assert list(np.nonzero(g.dealias_mask)[0]) == [0, 1, 2, 3]


class TestSymbol:
    def test_zero_frequency(self):
        for power in (0.5, 1.0, -0.5, 3.0):
            assert symbol_F(0.0, 0.3, power) == 1.0

    def test_half_power_at_unit_argument(self):
        mu = 0.25
        xi = 1.0 / np.sqrt(mu)
        assert symbol_F(xi, mu, 0.5) == pytest.approx(mp_symbol_F(1.0, 0.5), abs=1e-15)
        assert symbol_F(xi, mu, 0.5) == pytest.approx(0.969075, abs=1e-6)

    def test_large_frequency_asymptote(self):
        t = 1e6
        val = symbol_F(t, 1.0, 1.0)
        assert 1 - 1e-5 <= val * t / 3 <= 1

    @pytest.mark.parametrize("t", [1e-8, 1e-3, 0.1, 0.3, 0.4999, 0.5, 0.7, 2.0, 30.0])
    def test_against_high_precision(self, t):
        assert symbol_F(t, 1.0) == pytest.approx(mp_symbol_F(t), rel=1e-14)

    def test_series_matches_direct_at_switch(self):
        t = SERIES_THRESHOLD
        direct = 3 * (t / np.tanh(t) - 1) / t**2
        series = symbol_F(np.nextafter(t, 0), 1.0)
        assert series == pytest.approx(direct, rel=1e-12)

    def test_even_positive_and_monotone(self):
        xi = np.linspace(0, 200, 4001)
        for mu in (1.0, 0.1, 0.01):
            f = symbol_F(xi, mu)
            assert np.all(f > 0) and np.all(f <= 1)
            assert np.all(np.diff(f) <= 1e-16)
            np.testing.assert_array_equal(f, symbol_F(-xi, mu))

    def test_multiplier_symbol_object(self):
        sym = MultiplierSymbol(0.5, 0.1)
        assert sym(3.0) == symbol_F(3.0, 0.1, 0.5)


class TestTransforms:
    def test_mean_is_zeroth_coefficient(self, grid128, rng):
        f = rng.normal(size=128)
        assert forward(f, grid128)[0].real == pytest.approx(np.mean(f), rel=1e-13)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31))
    def test_roundtrip(self, seed):
        g = make_grid(64, 3.0)
        f = np.random.default_rng(seed).normal(size=64) * 10.0**np.random.default_rng(seed).integers(-5, 5)
        np.testing.assert_allclose(inverse(forward(f, g), g), f, rtol=0, atol=1e-12 * np.max(np.abs(f)))


class TestMultiplier:
    def test_constant_unchanged(self, grid128):
        c = np.full(128, 2.5)
        np.testing.assert_allclose(apply_multiplier(c, MultiplierSymbol(0.5, 1.0), grid128), c, atol=1e-14)

    @pytest.mark.parametrize("k", [1, 5, 20])
    def test_cosine_eigenfunction(self, grid128, k):
        mu = 0.3
        f = np.cos(k * grid128.x)
        out = apply_multiplier(f, MultiplierSymbol(0.5, mu), grid128)
        np.testing.assert_allclose(out, symbol_F(k, mu, 0.5) * f, atol=1e-14)

    def test_linearity(self, grid128, rng):
        f, g = rng.normal(size=128), rng.normal(size=128)
        sym = MultiplierSymbol(0.5, 0.2)
        lhs = apply_multiplier(2.0 * f - 3.0 * g, sym, grid128)
        rhs = 2.0 * apply_multiplier(f, sym, grid128) - 3.0 * apply_multiplier(g, sym, grid128)
        np.testing.assert_allclose(lhs, rhs, atol=1e-13)

    def test_half_power_contracts_l2(self, grid128, rng):
        assert np.all(symbol_F(grid128.rwavenumbers, 1.0, 0.5) <= 1.0)
        for _ in range(10):
            f = rng.normal(size=128)
            out = apply_multiplier(f, MultiplierSymbol(0.5, 1.0), grid128)
            assert np.linalg.norm(out) <= np.linalg.norm(f)

    def test_callable_and_array_symbols(self, grid128, rng):
        f = rng.normal(size=128)
        a = apply_multiplier(f, lambda k: 1.0 / (1.0 + k**2), grid128)
        b = apply_multiplier(f, 1.0 / (1.0 + grid128.rwavenumbers**2), grid128)
        np.testing.assert_array_equal(a, b)


class TestDerivative:
    def test_first_and_second(self):
        g = make_grid(64, 4.0)
        k = 2 * np.pi * 3 / 4.0
        f = np.sin(k * g.x)
        np.testing.assert_allclose(spectral_derivative(f, 1, g), k * np.cos(k * g.x), atol=1e-12)
        np.testing.assert_allclose(spectral_derivative(f, 2, g), -k**2 * f, atol=1e-11)
        np.testing.assert_allclose(spectral_derivative(np.ones(64), 1, g), 0.0, atol=1e-15)

    def test_nyquist_zeroed_for_odd_order(self):
        g = make_grid(16, 2 * np.pi)
        nyq = np.cos(8 * g.x)
        np.testing.assert_allclose(spectral_derivative(nyq, 1, g), 0.0, atol=1e-14)
        np.testing.assert_allclose(spectral_derivative(nyq, 2, g), -64 * nyq, atol=1e-12)

    def test_bad_order(self, grid128):
        with pytest.raises(ValueError):
            spectral_derivative(np.zeros(128), 3, grid128)


class TestDealiasedProduct:
    def test_times_one(self, grid128, rng):
        f = band_limited(grid128, rng, 40)
        np.testing.assert_allclose(dealiased_product([f, np.ones(128)], grid128), f, atol=1e-13)

    def test_resolved_square(self, grid128):
        c = np.cos(10 * grid128.x)
        np.testing.assert_allclose(dealiased_product([c, c], grid128), 0.5 * (1 + np.cos(20 * grid128.x)),
                                   atol=1e-14)

    def test_truncated_harmonic(self, grid128):
        # 2k = 50 > N/3, so only the mean survives
        c = np.cos(25 * grid128.x)
        np.testing.assert_allclose(dealiased_product([c, c], grid128), 0.5, atol=1e-14)

    @pytest.mark.parametrize("n", [0, 1, 6])
    def test_factor_count(self, grid128, n):
        with pytest.raises(ValueError):
            dealiased_product([np.ones(128)] * n, grid128)

    def test_dealias_idempotent(self, grid128, rng):
        f = rng.normal(size=128)
        once = dealias(f, grid128)
        np.testing.assert_allclose(dealias(once, grid128), once, atol=1e-14)


class TestNorms:
    def test_zero(self, grid128):
        assert sobolev_norm(np.zeros(128), 1.0, grid128) == 0.0
        assert x_mu_norm(np.zeros(128), 1.0, 0.5, grid128) == 0.0

    def test_parseval(self):
        g = make_grid(64, 5.0)
        f = np.cos(2 * np.pi * 4 * g.x / 5.0)
        assert sobolev_norm(f, 0.0, g) ** 2 == pytest.approx(5.0 / 2, rel=1e-13)

    def test_x_mu_single_mode(self):
        g = make_grid(32, 2 * np.pi)
        f = np.cos(g.x)
        # H^1 part: 2 pi * (1/2) * 2; half-derivative part identical for k = 1, mu = 1
        assert x_mu_norm(f, 1.0, 1.0, g) ** 2 == pytest.approx(4 * np.pi, rel=1e-13)

    def test_equivalence_sweep_bounded(self, grid128, rng):
        """|f|^2_{H^s} + mu |F^{1/2} d/dx f|^2_{H^s} is comparable with |f|^2_{X^s_mu}."""
        ratios = []
        for mu in (1.0, 0.1, 0.01):
            for _ in range(100):
                f = band_limited(grid128, rng, 40)
                fdx = apply_multiplier(f, lambda k: np.abs(k) * symbol_F(k, mu, 0.5), grid128)
                mid = sobolev_norm(f, 1.0, grid128) ** 2 + mu * sobolev_norm(fdx, 1.0, grid128) ** 2
                ratios.append(mid / x_mu_norm(f, 1.0, mu, grid128) ** 2)
        c = 10.0
        assert 1 / c <= min(ratios) and max(ratios) <= c

    def test_F_half_minus_one_bounded_uniformly(self, grid128, rng):
        worst = {}
        for mu in (0.1, 0.01, 0.001):
            vals = []
            for _ in range(50):
                f = band_limited(grid128, rng, 40)
                g = apply_multiplier(f, lambda k: symbol_F(k, mu, 0.5) - 1.0, grid128)
                vals.append(sobolev_norm(g, 0.0, grid128) / (mu * sobolev_norm(f, 2.0, grid128)))
            worst[mu] = max(vals)
        # (1 - F^{1/2}(t)) / t^2 <= 1/30
        assert max(worst.values()) <= 1 / 30 + 1e-12
