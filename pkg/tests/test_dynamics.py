"""Filter recursions: hand-oracle checks, reductions, state carry and the
interval/continuous agreement at large scales."""

import math

import numpy as np
import pytest

from tickvol import dist
from tickvol.dynamics import (GarchParams, GasContParams, IntervalModelParams,
                              ModelSpec, ParamVector, filter_garch,
                              filter_gas_continuous, filter_interval,
                              filter_model, loglik, loglik_mean)
from tickvol.errors import DomainError, FilterDivergedError

from conftest import make_series


class TestGarch:
    def test_constant_variance_reduction(self):
        p = GarchParams(mu=0.0, omega=0.7, alpha=0.0, phi=0.0, nu=6.0)
        out = filter_garch(np.array([1.0, -2.0, 0.0, 3.0]), p)
        assert np.allclose(out.sigma2_path, 0.7)

    def test_zero_series_monotone_to_long_run(self):
        p = GarchParams(mu=0.0, omega=0.5, alpha=0.1, phi=0.8, nu=6.0)
        out = filter_garch(np.zeros(50), p)
        # starts at omega/(1-alpha-phi)=5, decays toward omega/(1-phi)=2.5
        assert out.sigma2_path[0] == pytest.approx(5.0)
        assert np.all(np.diff(out.sigma2_path) < 0)
        assert out.sigma2_path[-1] == pytest.approx(2.5, abs=1e-4)

    def test_hand_recursion(self):
        # independent in-test recursion of the variance equation
        y = np.array([1.0, -2.0, 0.0])
        omega, alpha, phi, mu, nu = 0.1, 0.1, 0.8, 0.0, 5.0
        sig = [omega / (1.0 - alpha - phi)]
        for t in range(1, 3):
            e = y[t - 1] - mu
            sig.append(omega + alpha * e * e + phi * sig[-1])
        out = filter_garch(y, GarchParams(mu, omega, alpha, phi, nu))
        assert np.allclose(out.sigma2_path, sig, rtol=1e-14)
        assert sig == pytest.approx([1.0, 1.0, 1.3])

    def test_loglik_terms_are_scaled_t_densities(self):
        y = np.array([1.0, -2.0, 0.0])
        p = GarchParams(0.0, 0.1, 0.1, 0.8, 5.0)
        out = filter_garch(y, p)
        for t in range(3):
            z = y[t] / math.sqrt(out.sigma2_path[t])
            ref = math.log(dist.t_pdf(z, 5.0) / math.sqrt(out.sigma2_path[t]))
            assert out.loglik_terms[t] == pytest.approx(ref, rel=1e-12)

    def test_invalid_params(self):
        with pytest.raises(DomainError):
            GarchParams(0.0, 0.1, 0.5, 0.5, 5.0)
        with pytest.raises(DomainError):
            GarchParams(0.0, -0.1, 0.1, 0.5, 5.0)


class TestGasContinuous:
    def test_alpha_zero_constant(self):
        p = GasContParams(mu=0.0, omega=0.5, alpha=0.0, phi=0.5, nu=8.0)
        out = filter_gas_continuous(np.array([1.0, 2.0, -1.0]), p)
        assert np.allclose(np.log(out.sigma2_path), 1.0)

    def test_center_series_deterministic_ar1(self):
        # y_t = mu for all t: score = -1/2, so ln sigma2 follows an AR(1)
        # with intercept omega - alpha/2
        p = GasContParams(mu=1.0, omega=0.4, alpha=0.1, phi=0.7, nu=5.0)
        out = filter_gas_continuous(np.ones(20), p)
        ls = [p.omega / (1.0 - p.phi)]
        for _ in range(19):
            ls.append(p.omega - p.alpha / 2.0 + p.phi * ls[-1])
        assert np.allclose(np.log(out.sigma2_path), ls, rtol=1e-12)

    def test_independent_recursion_oracle(self, rng):
        y = rng.standard_t(6, 200) * 2.0
        p = GasContParams(mu=0.1, omega=0.2, alpha=0.07, phi=0.9, nu=6.0)
        out = filter_gas_continuous(y, p)
        # re-implementation with the score written out directly
        ls = p.omega / (1.0 - p.phi)
        for t in range(200):
            s2 = math.exp(ls)
            assert out.sigma2_path[t] == pytest.approx(s2, rel=1e-12)
            z2 = (y[t] - p.mu) ** 2 / s2
            score = 0.5 * ((p.nu + 1.0) * z2 / (p.nu + z2) - 1.0)
            ls = p.omega + p.alpha * score + p.phi * ls

    def test_literal_level_recursion_differs_and_can_diverge(self):
        y = np.zeros(300)
        p = GasContParams(mu=0.0, omega=3.0, alpha=0.05, phi=0.9, nu=8.0)
        default = filter_gas_continuous(y, p)
        assert np.isfinite(default.sigma2_path).all()
        with pytest.raises(FilterDivergedError):
            filter_gas_continuous(y, p, literal_level_recursion=True)


class TestFilterInterval:
    def test_theta_zero_keeps_location_at_zero(self):
        p = IntervalModelParams(theta=0.0, omega=0.3, alpha=0.05, phi=0.9, nu=8.0)
        out = filter_interval(np.array([1.0, -3.0, 2.0, 0.0]), p, dist_kind="t")
        assert np.all(out.mu_path == 0.0)

    def test_static_reduction(self):
        p = IntervalModelParams(theta=0.0, omega=0.5, alpha=0.0, phi=0.0)
        lnshat = np.array([0.1, -0.2, 0.3])
        out = filter_interval(np.array([0.0, 1.0, -1.0]), p,
                              s_hat=np.exp(lnshat), dist_kind="normal")
        assert np.allclose(np.log(out.sigma2_path), 0.5 + lnshat, rtol=1e-12)

    def test_ma1_first_step(self):
        p = IntervalModelParams(theta=0.5, omega=0.0, alpha=0.0, phi=0.0, nu=5.0)
        out = filter_interval(np.array([2.0, 0.0]), p, dist_kind="t")
        assert out.mu_path[0] == 0.0
        assert out.mu_path[1] == pytest.approx(1.0)

    def test_location_bound(self, rng):
        # |mu_t| <= max|y| * |theta| / (1 - |theta|)
        y = rng.integers(-6, 7, 400).astype(float)
        p = IntervalModelParams(theta=-0.6, omega=1.0, alpha=0.03, phi=0.9, nu=8.0)
        out = filter_interval(y, p, dist_kind="t")
        bound = np.abs(y).max() * 0.6 / 0.4
        assert np.all(np.abs(out.mu_path) <= bound + 1e-12)

    def test_score_feedback_sign(self):
        # alpha > 0: a far-tail observation raises e_{t+1} above phi*e_t,
        # an observation at the location lowers it
        p = IntervalModelParams(theta=0.0, omega=0.0, alpha=0.1, phi=0.9, nu=5.0)
        out_tail = filter_interval(np.array([50.0, 0.0]), p, dist_kind="t")
        assert out_tail.e_path[1] > p.phi * out_tail.e_path[0]
        out_center = filter_interval(np.array([0.0, 0.0]), p, dist_kind="t")
        assert out_center.e_path[1] < p.phi * out_center.e_path[0]

    def test_underflow_recorded_filter_continues(self):
        p = IntervalModelParams(theta=0.0, omega=0.0, alpha=0.05, phi=0.9)
        y = np.zeros(10)
        y[4] = 100.0  # ~100 sigma under the normal kernel
        out = filter_interval(y, p, dist_kind="normal")
        assert out.underflow_count == 1
        assert out.loglik_terms[4] == -math.inf
        assert np.isfinite(out.loglik_terms[[0, 1, 2, 3, 5, 6, 7, 8, 9]]).all()
        assert out.loglik_total == -math.inf
        # the underflowed observation contributes a zero score
        assert out.score_path[4] == 0.0

    def test_divergence_flagged(self):
        # the t score is bounded by nu/2, so a huge score coefficient is
        # needed to push ln sigma2 past the overflow threshold
        p = IntervalModelParams(theta=0.0, omega=1.0, alpha=400.0, phi=0.99,
                                nu=5.0)
        y = np.zeros(500)
        y[1] = 500.0
        with pytest.raises(FilterDivergedError):
            filter_interval(y, p, dist_kind="t")

    def test_skellam_floor_counted(self):
        # theta pushes |mu_t| above the tiny sigma2 from a very negative omega
        p = IntervalModelParams(theta=0.9, omega=-12.0, alpha=0.0, phi=0.0)
        out = filter_interval(np.array([4.0, 4.0, 4.0]), p, dist_kind="skellam")
        assert out.sigma2_floor_count >= 1
        assert np.all(out.sigma2_path >= np.abs(out.mu_path))

    def test_skellam_requires_integers(self):
        p = IntervalModelParams(theta=0.0, omega=1.0, alpha=0.0, phi=0.0)
        with pytest.raises(DomainError):
            filter_interval(np.array([0.5, 1.0]), p, dist_kind="skellam")


class TestStateCarry:
    """Filtering a concatenated series equals filtering the parts with
    transferred state, term by term."""

    @pytest.mark.parametrize("dist_kind", ["normal", "t", "skellam", "zi_skellam"])
    def test_interval_families(self, dist_kind, rng):
        y = rng.integers(-4, 5, 60).astype(float)
        p = IntervalModelParams(theta=-0.3, omega=0.8, alpha=0.05, phi=0.9,
                                nu=6.0, pi=0.2)
        full = filter_interval(y, p, dist_kind=dist_kind)
        first = filter_interval(y[:25], p, dist_kind=dist_kind)
        second = filter_interval(y[25:], p, dist_kind=dist_kind,
                                 state0=first.final_state)
        merged = np.concatenate([first.loglik_terms, second.loglik_terms])
        assert np.allclose(merged, full.loglik_terms, rtol=1e-12)
        assert np.allclose(np.concatenate([first.sigma2_path, second.sigma2_path]),
                           full.sigma2_path, rtol=1e-12)

    def test_garch(self, rng):
        y = rng.standard_normal(40)
        p = GarchParams(0.0, 0.2, 0.1, 0.8, 7.0)
        full = filter_garch(y, p)
        first = filter_garch(y[:17], p)
        second = filter_garch(y[17:], p, state0=first.final_state)
        assert np.allclose(np.concatenate([first.sigma2_path, second.sigma2_path]),
                           full.sigma2_path, rtol=1e-14)

    def test_gas(self, rng):
        y = rng.standard_normal(40)
        p = GasContParams(0.0, 0.1, 0.05, 0.9, 7.0)
        full = filter_gas_continuous(y, p)
        first = filter_gas_continuous(y[:17], p)
        second = filter_gas_continuous(y[17:], p, state0=first.final_state)
        assert np.allclose(np.concatenate([first.loglik_terms, second.loglik_terms]),
                           full.loglik_terms, rtol=1e-13)


class TestContinuousIntervalAgreement:
    def test_paths_agree_at_large_scale(self, rng):
        # sigma ~ 100: intervals span many integers, the interval filter and
        # the continuous score-driven filter track each other per-step
        omega = math.log(1.0e4)
        phi, alpha, nu = 0.9, 0.05, 8.0
        y = np.round(rng.standard_t(nu, 500) * 100.0)
        p_int = IntervalModelParams(theta=0.0, omega=omega, alpha=alpha,
                                    phi=phi, nu=nu)
        # equivalent parameterization of the continuous recursion
        p_gas = GasContParams(mu=0.0, omega=omega * (1.0 - phi), alpha=alpha,
                              phi=phi, nu=nu)
        out_i = filter_interval(y, p_int, dist_kind="t")
        out_g = filter_gas_continuous(y, p_gas)
        gap = np.abs(np.log(out_i.sigma2_path) - np.log(out_g.sigma2_path))
        assert gap.max() < 1e-3


class TestLoglik:
    def test_single_observation_static_normal(self):
        spec = ModelSpec("interval_normal")
        p = ParamVector.from_dict(spec, dict(theta=0.0, omega=0.0, alpha=0.0,
                                             phi=0.0))
        expected = math.log(math.erf(0.5 / math.sqrt(2.0)))
        assert loglik(np.array([0.0]), spec, p) == pytest.approx(expected,
                                                                 abs=1e-12)

    def test_total_is_sum_of_terms(self, rng):
        spec = ModelSpec("interval_t")
        p = ParamVector.from_dict(spec, dict(theta=-0.2, omega=1.0, alpha=0.05,
                                             phi=0.9, nu=6.0))
        y = make_series(rng.integers(-5, 6, 80))
        out = filter_model(y, spec, p)
        assert loglik(y, spec, p) == pytest.approx(out.loglik_terms.sum(),
                                                   rel=1e-14)
        assert loglik_mean(y, spec, p) == pytest.approx(
            out.loglik_terms.mean(), rel=1e-14)

    def test_split_additivity(self, rng):
        spec = ModelSpec("skellam")
        p = ParamVector.from_dict(spec, dict(theta=-0.2, omega=0.8, alpha=0.04,
                                             phi=0.9))
        y = rng.integers(-4, 5, 100).astype(float)
        total = loglik(y, spec, p)
        first = filter_model(y[:40], spec, p)
        second = filter_model(y[40:], spec, p, state0=first.final_state)
        assert total == pytest.approx(
            first.loglik_terms.sum() + second.loglik_terms.sum(), rel=1e-12)

    def test_underflow_gives_neg_inf(self):
        spec = ModelSpec("interval_normal")
        p = ParamVector.from_dict(spec, dict(theta=0.0, omega=0.0, alpha=0.0,
                                             phi=0.0))
        y = np.array([0.0, 100.0, 0.0])
        assert loglik(y, spec, p) == -math.inf

    def test_static_t_matches_reference(self, rng):
        spec = ModelSpec("static_t")
        p = ParamVector.from_dict(spec, dict(sigma2=2.0, nu=5.0))
        y = rng.integers(-5, 6, 50).astype(float)
        ref = sum(math.log(dist.t_pdf(v / math.sqrt(2.0), 5.0) / math.sqrt(2.0))
                  for v in y)
        assert loglik(y, spec, p) == pytest.approx(ref, rel=1e-12)

    def test_param_name_mismatch(self):
        spec = ModelSpec("interval_t")
        wrong = ParamVector(names=("a", "b"), values=(0.0, 1.0))
        with pytest.raises(DomainError):
            loglik(np.array([0.0, 1.0]), spec, wrong)


class TestModelSpec:
    def test_cli_round_trip(self):
        for name in ("garch-t", "gas-t", "static-t", "normal", "t", "skellam",
                     "zi-skellam"):
            assert ModelSpec.from_cli_name(name).cli_name == name

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            ModelSpec("weibull")
