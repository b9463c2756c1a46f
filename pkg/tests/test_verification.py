import numpy as np
import pytest
from pydantic import ValidationError

from wgn.spectral import MultiplierSymbol, apply_multiplier, make_grid, sobolev_norm, symbol_F
from wgn.verification import (
    PropertyReport,
    SweepSpec,
    check_operator_contracts,
    check_symbol_estimates,
    convergence_orders,
    linear_mode_errors,
    n_threads,
    random_field,
)

SMALL = SweepSpec(n_fields=8, mu_values=[1.0, 0.01])


class TestSweepSpec:
    def test_defaults(self):
        spec = SweepSpec()
        assert spec.mu_values == [1.0, 0.1, 0.01] and spec.n_fields == 100 and spec.s == 2.0

    @pytest.mark.parametrize("kw", [dict(n_fields=0), dict(mu_values=[]), dict(mu_values=[2.0]),
                                    dict(unknown=1), dict(band_fraction=0.9)])
    def test_rejects(self, kw):
        with pytest.raises(ValidationError):
            SweepSpec(**kw)


class TestReport:
    def test_pass_flag(self):
        assert PropertyReport("a", 3, 0.5, 1.0).passed
        assert not PropertyReport("a", 3, 1.5, 1.0).passed
        assert not PropertyReport("a", 3, float("nan"), 1.0).passed

    def test_to_dict(self):
        d = PropertyReport("a", 3, 0.5, 1.0, {"x": 2.0}).to_dict()
        assert d["name"] == "a" and d["passed"] is True and d["measured"] == {"x": 2.0}


def test_random_field_band():
    g = make_grid(128, 2 * np.pi)
    f = random_field(g, np.random.default_rng(0), 1 / 3)
    spec = np.abs(np.fft.rfft(f))
    assert spec[43:].max() < 1e-12 * spec.max()


def test_thread_env_caps(monkeypatch):
    import os
    monkeypatch.setenv("WGN_THREADS", "3")
    assert n_threads() == min(3, os.cpu_count() or 1)
    monkeypatch.setenv("WGN_THREADS", "1")
    assert n_threads() == 1


class TestSymbolEstimates:
    def test_all_pass(self):
        reports = check_symbol_estimates(SMALL)
        assert reports and all(r.passed for r in reports), [r for r in reports if not r.passed]

    def test_deterministic(self):
        a = [r.to_dict() for r in check_symbol_estimates(SMALL)]
        b = [r.to_dict() for r in check_symbol_estimates(SMALL)]
        assert a == b

    def test_thread_count_irrelevant(self, monkeypatch):
        monkeypatch.setenv("WGN_THREADS", "1")
        a = [r.to_dict() for r in check_symbol_estimates(SMALL)]
        monkeypatch.setenv("WGN_THREADS", "4")
        b = [r.to_dict() for r in check_symbol_estimates(SMALL)]
        assert a == b

    def test_forced_failure(self):
        reports = check_symbol_estimates(SMALL.model_copy(update={"threshold_scale": 0.0}))
        assert not all(r.passed for r in reports)

    def test_single_mode_ratio(self):
        """For one Fourier mode the F^{-1/2} ratio equals the symbol exactly."""
        g = make_grid(128, 2 * np.pi)
        mu, k = 0.1, 9
        f = np.cos(k * g.x)
        out = apply_multiplier(f, MultiplierSymbol(-0.5, mu), g)
        ratio = sobolev_norm(out, 2.0, g) / sobolev_norm(f, 2.0, g)
        assert ratio == pytest.approx(symbol_F(k, mu, -0.5), rel=1e-13)


def test_operator_contracts():
    reports = check_operator_contracts(SMALL)
    names = {r.name for r in reports}
    assert {"self_adjointness", "coercivity_witness", "inversion_roundtrip"} <= names
    assert all(r.passed for r in reports), [r for r in reports if not r.passed]


def test_linear_mode_errors_shrink():
    errs, dev = linear_mode_errors([50, 100])
    assert errs[1] < errs[0] / 10
    assert dev < 1e-10


@pytest.mark.slow
def test_convergence_orders():
    reports = convergence_orders()
    assert all(r.passed for r in reports), reports
