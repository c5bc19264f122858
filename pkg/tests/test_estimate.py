"""Parameter transforms, the optimizer contract, per-day fitting behavior
(degenerate corners included) and cross-day medians."""

import math

import numpy as np
import pytest

from tickvol.dynamics import ModelSpec, ParamVector
from tickvol.errors import DomainError
from tickvol.estimate import (BoundRegime, FitResult, fit_all_days, fit_day,
                              optimize, summarize_fits, transform, untransform)
from tickvol.sim import SimSpec, simulate

from conftest import make_series, zero_heavy_series


def _random_admissible(spec, regime, rng):
    fam = spec.family
    if fam == "garch_t":
        a = rng.uniform(0.01, 0.9)
        return ParamVector.from_dict(spec, dict(
            mu=rng.normal(), omega=math.exp(rng.uniform(-3, 3)),
            alpha=a, phi=rng.uniform(0.01, 0.98 - a),
            nu=regime.nu_lower + math.exp(rng.uniform(-2, 3))))
    if fam == "gas_t":
        return ParamVector.from_dict(spec, dict(
            mu=rng.normal(), omega=rng.uniform(-30, 30),
            alpha=(math.exp(rng.uniform(-4, 0)) if regime.alpha_nonneg
                   else rng.uniform(-2, 2)),
            phi=rng.uniform(-0.99, 0.99),
            nu=regime.nu_lower + math.exp(rng.uniform(-2, 3))))
    if fam == "static_t":
        return ParamVector.from_dict(spec, dict(
            sigma2=math.exp(rng.uniform(-5, 5)),
            nu=regime.nu_lower + math.exp(rng.uniform(-2, 3))))
    vals = dict(theta=rng.uniform(-0.99, 0.99), omega=rng.uniform(-30, 30),
                alpha=(math.exp(rng.uniform(-4, 0)) if regime.alpha_nonneg
                       else rng.uniform(-2, 2)),
                phi=rng.uniform(-0.99, 0.99))
    if "nu" in spec.param_names:
        vals["nu"] = regime.nu_lower + math.exp(rng.uniform(-2, 3))
    if "pi" in spec.param_names:
        vals["pi"] = rng.uniform(0.01, 0.99)
    return ParamVector.from_dict(spec, vals)


class TestTransforms:
    @pytest.mark.parametrize("family", ["garch_t", "gas_t", "static_t",
                                        "interval_normal", "interval_t",
                                        "skellam", "zi_skellam"])
    @pytest.mark.parametrize("regime_name", ["unbounded", "gas-like"])
    def test_round_trip(self, family, regime_name, rng):
        spec = ModelSpec(family)
        regime = BoundRegime.preset(regime_name)
        for _ in range(80):
            p = _random_admissible(spec, regime, rng)
            x = transform(p, spec, regime)
            back = untransform(x, spec, regime)
            assert np.allclose(back.to_array(), p.to_array(),
                               rtol=1e-12, atol=1e-12)

    def test_alpha_nonneg_round_trip(self, rng):
        spec = ModelSpec("interval_t")
        regime = BoundRegime.preset("unbounded", alpha_nonneg=True)
        for _ in range(50):
            p = _random_admissible(spec, regime, rng)
            x = transform(p, spec, regime)
            assert np.allclose(untransform(x, spec, regime).to_array(),
                               p.to_array(), rtol=1e-12, atol=1e-12)

    def test_nu_at_bound_rejected(self):
        spec = ModelSpec("interval_t")
        regime = BoundRegime.preset("gas-like")
        p = ParamVector.from_dict(spec, dict(theta=0.0, omega=1.0, alpha=0.1,
                                             phi=0.5, nu=4.0))
        with pytest.raises(DomainError):
            transform(p, spec, regime)

    def test_phi_zero_maps_to_zero(self):
        spec = ModelSpec("interval_t")
        regime = BoundRegime.preset("unbounded")
        p = ParamVector.from_dict(spec, dict(theta=0.0, omega=0.0, alpha=0.0,
                                             phi=0.0, nu=5.0))
        x = transform(p, spec, regime)
        assert x[0] == 0.0 and x[3] == 0.0

    def test_garch_simplex_enforces_stationarity(self, rng):
        spec = ModelSpec("garch_t")
        regime = BoundRegime.preset("rugarch-like")
        for _ in range(200):
            x = rng.uniform(-20, 20, 5)
            p = untransform(x, spec, regime)
            assert p["alpha"] + p["phi"] < 1.0
            assert p["nu"] > 2.1


class TestOptimize:
    def test_quadratic_bowl(self):
        target = np.array([1.5, -2.0, 0.5])

        def f(x):
            return float(np.sum((x - target) ** 2))

        res = optimize(f, np.zeros(3), budget=4000)
        assert res.converged
        assert np.allclose(res.x, target, atol=1e-6)

    def test_rosenbrock(self):
        def f(x):
            return float(100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2)

        res = optimize(f, np.array([-1.2, 1.0]), budget=10000)
        assert np.allclose(res.x, [1.0, 1.0], atol=1e-4)

    def test_nonfinite_probes_rejected(self):
        def f(x):
            if abs(x[0]) > 3.0 or abs(x[1]) > 3.0:
                return math.inf
            return float((x[0] - 2.5) ** 2 + (x[1] + 1.0) ** 2)

        res = optimize(f, np.array([2.9, -2.9]), budget=4000)
        assert res.converged
        assert np.allclose(res.x, [2.5, -1.0], atol=1e-5)

    def test_history_monotone(self):
        def f(x):
            return float(np.sum(x ** 2))

        res = optimize(f, np.array([3.0, -4.0]), budget=2000)
        hist = np.asarray(res.history)
        assert np.all(np.diff(hist) <= 0.0)

    def test_budget_respected(self):
        calls = [0]

        def f(x):
            calls[0] += 1
            return float(np.sum(x ** 2))

        res = optimize(f, np.full(4, 5.0), budget=300)
        assert res.objective_evals == calls[0]
        assert calls[0] <= 330  # scipy may finish an iteration past maxfev


class TestFitDay:
    def test_constant_zero_series_skellam_pins_omega(self):
        y = make_series(np.zeros(80, dtype=int))
        spec = ModelSpec("skellam")
        fit = fit_day(y, spec, BoundRegime.preset("unbounded"), budget=1500)
        assert fit.converged
        assert "omega" in fit.at_bound
        # variance pushed to the degenerate corner
        assert fit.params["omega"] < -15.0

    def test_static_t_degenerate_unbounded(self):
        y = zero_heavy_series(n=4000, seed=5)
        spec = ModelSpec("static_t")
        fit = fit_day(y, spec, BoundRegime.preset("unbounded"), budget=2500)
        assert fit.converged
        assert fit.sigma2_floored
        assert fit.params["nu"] < 0.5
        assert fit.loglik_avg > 10.0

    def test_static_t_gas_like_pins_nu(self):
        y = zero_heavy_series(n=4000, seed=5)
        spec = ModelSpec("static_t")
        fit = fit_day(y, spec, BoundRegime.preset("gas-like"), budget=2500)
        assert fit.converged
        assert "nu" in fit.at_bound
        assert fit.params["nu"] == pytest.approx(4.0, abs=1e-3)
        assert not fit.sigma2_floored

    def test_min_length_enforced(self):
        y = make_series(np.zeros(10, dtype=int))
        with pytest.raises(DomainError):
            fit_day(y, ModelSpec("skellam"), BoundRegime.preset("unbounded"))

    def test_json_round_trip(self):
        y = make_series(np.array([0, 1, -1, 0, 2] * 20))
        fit = fit_day(y, ModelSpec("skellam"), BoundRegime.preset("unbounded"),
                      budget=800)
        doc = fit.to_json_dict()
        back = FitResult.from_json_dict(doc)
        assert back.params.as_dict() == fit.params.as_dict()
        assert back.to_json() == fit.to_json()


class TestNesting:
    def test_free_pi_never_beats_restricted_by_less(self):
        spec = ModelSpec("skellam")
        params = ParamVector.from_dict(
            spec, dict(theta=-0.2, omega=0.7, alpha=0.03, phi=0.9))
        day = simulate(SimSpec(model=spec, params=params, n=1200, seed=21))[0]
        regime = BoundRegime.preset("unbounded")
        fit_sk = fit_day(day, spec, regime, budget=1500)
        fit_zi = fit_day(day, ModelSpec("zi_skellam"), regime, budget=1500)
        assert fit_sk.converged and fit_zi.converged
        assert fit_zi.loglik_avg >= fit_sk.loglik_avg - 1e-8


class TestFitAllDays:
    def test_identical_days_median_equals_single(self):
        spec = ModelSpec("skellam")
        params = ParamVector.from_dict(
            spec, dict(theta=-0.2, omega=0.6, alpha=0.03, phi=0.85))
        day = simulate(SimSpec(model=spec, params=params, n=400, seed=17))[0]
        days = [day] * 5
        fits, summary = fit_all_days(days, spec, BoundRegime.preset("unbounded"),
                                     budget=800)
        assert summary.n_days == 5 and summary.n_not_converged == 0
        single = fits[0].params.as_dict()
        for name, value in single.items():
            assert summary.medians[name] == pytest.approx(value, rel=1e-12)

    def test_threaded_matches_serial(self):
        spec = ModelSpec("skellam")
        params = ParamVector.from_dict(
            spec, dict(theta=0.0, omega=0.5, alpha=0.02, phi=0.8))
        days = simulate(SimSpec(model=spec, params=params, n=300, days=3, seed=9))
        regime = BoundRegime.preset("unbounded")
        fits1, s1 = fit_all_days(days, spec, regime, budget=600, threads=1)
        fits2, s2 = fit_all_days(days, spec, regime, budget=600, threads=2)
        assert s1.medians == s2.medians
        for a, b in zip(fits1, fits2):
            assert a.params.as_dict() == b.params.as_dict()

    def test_recovery_smoke(self):
        spec = ModelSpec("skellam")
        truth = dict(theta=-0.3, omega=0.8, alpha=0.04, phi=0.9)
        params = ParamVector.from_dict(spec, truth)
        days = simulate(SimSpec(model=spec, params=params, n=2000, days=3,
                                seed=33))
        fits, summary = fit_all_days(days, spec, BoundRegime.preset("unbounded"),
                                     budget=1500)
        assert summary.n_not_converged == 0
        assert summary.medians["omega"] == pytest.approx(truth["omega"], abs=0.35)
        assert summary.medians["theta"] == pytest.approx(truth["theta"], abs=0.15)


class TestSummarizeFits:
    def _fake_fit(self, omega, converged=True, loglik=-2.0):
        spec = ModelSpec("skellam")
        return FitResult(
            spec=spec, regime=BoundRegime.preset("unbounded"),
            params=ParamVector.from_dict(
                spec, dict(theta=0.0, omega=omega, alpha=0.0, phi=0.0)),
            loglik_avg=loglik, converged=converged, iterations=1,
            objective_evals=1, at_bound=(), sigma2_floored=False, n_obs=100)

    def test_not_converged_excluded_and_counted(self):
        fits = [self._fake_fit(1.0), self._fake_fit(2.0),
                self._fake_fit(99.0, converged=False), self._fake_fit(3.0)]
        summary = summarize_fits(fits, arch_stats=[0.1, None, 0.2, 0.3])
        assert summary.n_not_converged == 1
        assert summary.medians["omega"] == pytest.approx(2.0)
        assert summary.excluded["omega"] == 1
        # one excluded for non-convergence, one for the unavailable statistic
        assert summary.medians["A"] == pytest.approx(0.2)
        assert summary.excluded["A"] == 2

    def test_all_failed_gives_none(self):
        fits = [self._fake_fit(1.0, converged=False)]
        summary = summarize_fits(fits)
        assert summary.medians["omega"] is None
        assert summary.medians["A"] is None
