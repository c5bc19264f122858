"""ARCH-LM, standardized residuals, next-day evaluation, the degeneracy scan
and fitted-vs-observed comparisons."""

import math

import numpy as np
import pytest

from tickvol import _kernels
from tickvol.diagnose import (arch_lm, evaluate_next_day, fitted_vs_observed,
                              nu_scan, standardized_residuals)
from tickvol.dynamics import ModelSpec, ParamVector, filter_model
from tickvol.errors import DomainError
from tickvol.estimate import BoundRegime, fit_day
from tickvol.sim import SimSpec, simulate

from conftest import make_series, zero_heavy_series


def _arch1_series(rng, n, alpha=0.5):
    y = np.empty(n)
    sigma2 = 1.0
    for t in range(n):
        y[t] = rng.standard_normal() * math.sqrt(sigma2)
        sigma2 = (1.0 - alpha) + alpha * y[t] ** 2
    return y


class TestArchLm:
    def test_constant_squares_unavailable(self):
        r = np.array([1.0, -1.0] * 30)
        assert arch_lm(r) is None

    def test_iid_normal_small(self, rng):
        hits = 0
        for _ in range(10):
            r2 = arch_lm(rng.standard_normal(10_000))
            hits += r2 < 0.005
        assert hits >= 9

    def test_planted_arch_detected(self, rng):
        for _ in range(5):
            assert arch_lm(_arch1_series(rng, 10_000)) > 0.05

    def test_scale_invariance(self, rng):
        r = rng.standard_normal(2_000)
        assert arch_lm(r) == pytest.approx(arch_lm(5.0 * r), abs=1e-12)

    def test_too_short_rejected(self):
        with pytest.raises(DomainError):
            arch_lm(np.ones(10), lags=10)


class TestStandardizedResiduals:
    def test_low_nu_unavailable(self):
        spec = ModelSpec("interval_t")
        p = ParamVector.from_dict(spec, dict(theta=0.0, omega=0.5, alpha=0.02,
                                             phi=0.8, nu=1.5))
        y = make_series(np.array([0, 1, -1, 0] * 20))
        out = filter_model(y, spec, p)
        assert standardized_residuals(y, out, spec, p) is None

    def test_normal_case_exact(self, rng):
        spec = ModelSpec("interval_normal")
        p = ParamVector.from_dict(spec, dict(theta=-0.2, omega=0.4, alpha=0.03,
                                             phi=0.9))
        y = make_series(rng.integers(-4, 5, 100))
        out = filter_model(y, spec, p)
        resid = standardized_residuals(y, out, spec, p)
        expected = (y.changes - out.mu_path) / np.sqrt(out.sigma2_path)
        assert np.allclose(resid, expected, rtol=1e-14)

    def test_skellam_unit_variance(self):
        spec = ModelSpec("skellam")
        p = ParamVector.from_dict(spec, dict(theta=0.0, omega=1.0, alpha=0.0,
                                             phi=0.0))
        day = simulate(SimSpec(model=spec, params=p, n=50_000, seed=4))[0]
        out = filter_model(day, spec, p)
        resid = standardized_residuals(day, out, spec, p)
        assert abs(np.var(resid) - 1.0) < 0.05

    def test_zi_skellam_variance_matching(self):
        spec = ModelSpec("zi_skellam")
        p = ParamVector.from_dict(spec, dict(theta=0.0, omega=1.2, alpha=0.0,
                                             phi=0.0, pi=0.4))
        day = simulate(SimSpec(model=spec, params=p, n=50_000, seed=6))[0]
        out = filter_model(day, spec, p)
        resid = standardized_residuals(day, out, spec, p)
        assert abs(np.mean(resid ** 2) - 1.0) < 0.05


class TestEvaluateNextDay:
    def _fit(self, day, family="interval_normal", budget=1000):
        return fit_day(day, ModelSpec(family), BoundRegime.preset("unbounded"),
                       budget=budget)

    def test_identical_day_reproduces_insample(self, rng):
        spec = ModelSpec("skellam")
        p = ParamVector.from_dict(spec, dict(theta=-0.2, omega=0.6, alpha=0.03,
                                             phi=0.85))
        day = simulate(SimSpec(model=spec, params=p, n=600, seed=8))[0]
        fit = fit_day(day, spec, BoundRegime.preset("unbounded"), budget=1200)
        res = evaluate_next_day(fit, day)
        assert res.failed is False
        assert res.loglik_avg_oos == pytest.approx(fit.loglik_avg, abs=1e-9)

    def test_normal_fails_on_outlier_day_t_survives(self, rng):
        base = np.round(rng.standard_normal(300) * 2.0).astype(int)
        day = make_series(base)
        fit_n = self._fit(day, "interval_normal")
        fit_t = self._fit(day, "interval_t")
        nxt = base.copy()
        nxt[150] = 200  # ~100 conditional standard deviations
        next_day = make_series(nxt, day="2024-01-03")
        res_n = evaluate_next_day(fit_n, next_day)
        assert res_n.failed is True
        assert res_n.loglik_avg_oos is None
        res_t = evaluate_next_day(fit_t, next_day)
        assert res_t.failed is False
        assert math.isfinite(res_t.loglik_avg_oos)

    def test_requires_converged_fit(self, rng):
        day = make_series(rng.integers(-3, 4, 100))
        fit = self._fit(day, "skellam")
        object.__setattr__(fit, "converged", False)
        with pytest.raises(DomainError):
            evaluate_next_day(fit, day)

    def test_read_only(self, rng):
        spec = ModelSpec("skellam")
        p = ParamVector.from_dict(spec, dict(theta=0.0, omega=0.6, alpha=0.02,
                                             phi=0.8))
        day = simulate(SimSpec(model=spec, params=p, n=400, seed=13))[0]
        fit = fit_day(day, spec, BoundRegime.preset("unbounded"), budget=800)
        before = fit.to_json()
        evaluate_next_day(fit, day)
        assert fit.to_json() == before


class TestNuScan:
    def test_zero_heavy_continuous_degenerates(self):
        y = zero_heavy_series(n=6000, seed=9)
        grid = np.array([0.1, 0.2, 0.5, 1.0, 2.0])
        scan = nu_scan(y, nu_grid=grid, likelihood_kind="continuous_density")
        ll = scan.loglik_avg
        # strictly increasing as nu decreases
        assert np.all(np.diff(ll) < 0.0)
        assert scan.floored[0]
        assert scan.sigma2_hat[0] == 2.0 ** -1074

    def test_zero_heavy_interval_interior(self):
        y = zero_heavy_series(n=6000, seed=9)
        grid = np.array([0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0])
        scan = nu_scan(y, nu_grid=grid, likelihood_kind="interval")
        assert not scan.floored.any()
        assert np.all(scan.loglik_avg <= 0.0)
        best = int(np.argmax(scan.loglik_avg))
        assert 0 < best < scan.nu_grid.size - 1  # interior maximum

    def test_no_zeros_wide_dispersion_interior(self, rng):
        draws = np.round(rng.standard_t(6, 4000) * 50.0)
        draws[draws == 0] = 1.0
        scan = nu_scan(draws, nu_grid=np.array([0.2, 1.0, 3.0, 6.0, 12.0, 40.0]),
                       likelihood_kind="continuous_density")
        assert not scan.floored.any()
        best = int(np.argmax(scan.loglik_avg))
        assert 0 < best < scan.nu_grid.size - 1

    def test_single_point_grid(self):
        y = zero_heavy_series(n=2000, seed=2)
        scan = nu_scan(y, nu_grid=[5.0], likelihood_kind="interval")
        assert scan.nu_grid.size == 1


class TestFittedVsObserved:
    def test_differences_sum_to_zero_over_full_support(self):
        spec = ModelSpec("skellam")
        p = ParamVector.from_dict(spec, dict(theta=0.0, omega=0.8, alpha=0.02,
                                             phi=0.8))
        day = simulate(SimSpec(model=spec, params=p, n=800, seed=14))[0]
        fit = fit_day(day, spec, BoundRegime.preset("unbounded"), budget=1000)
        lo, hi = day.changes.min() - 30, day.changes.max() + 30
        ks, diffs = fitted_vs_observed(fit, day, support=np.arange(lo, hi + 1))
        assert abs(diffs.sum()) < 1e-8

    def test_matching_model_small_differences(self):
        # empirical frequencies of a large simulated sample track the
        # generating model's probabilities
        spec = ModelSpec("skellam")
        p = ParamVector.from_dict(spec, dict(theta=0.0, omega=0.8, alpha=0.0,
                                             phi=0.0))
        day = simulate(SimSpec(model=spec, params=p, n=100_000, seed=15))[0]
        fit_stub = type("F", (), {})()
        fit_stub.spec = spec
        fit_stub.params = p
        ks, diffs = fitted_vs_observed(fit_stub, day)
        assert np.abs(diffs).max() < 0.01

    def test_small_nu_t_overstates_adjacent_integers(self):
        # the interval-ML static t on zero-heavy integer data lands at a small
        # nu and overestimates +/-1 while underestimating 0 and the tails
        y = zero_heavy_series(n=8000, seed=16)
        scan = nu_scan(y, nu_grid=np.logspace(np.log10(0.1), np.log10(20), 25),
                       likelihood_kind="interval")
        best = int(np.argmax(scan.loglik_avg))
        spec = ModelSpec("static_t")
        p = ParamVector.from_dict(spec, dict(sigma2=float(scan.sigma2_hat[best]),
                                             nu=float(scan.nu_grid[best])))
        fit_stub = type("F", (), {})()
        fit_stub.spec = spec
        fit_stub.params = p
        ks, diffs = fitted_vs_observed(fit_stub, y, support=np.arange(-3, 4))
        at = {int(k): d for k, d in zip(ks, diffs)}
        assert scan.nu_grid[best] < 2.0
        assert at[1] < 0.0 and at[-1] < 0.0
        assert at[0] > 0.0 and at[2] > 0.0 and at[-2] > 0.0


class TestKernelFlagContract:
    def test_interval_scan_never_floors_at_tiny_nu(self):
        y = zero_heavy_series(n=3000, seed=19)
        scan = nu_scan(y, nu_grid=[0.05, 0.1, 0.3],
                       likelihood_kind="interval")
        assert not scan.floored.any()
        assert (scan.sigma2_hat > _kernels.SIGMA2_FLOOR).all()
