"""Diagnostics: ARCH-LM statistic, out-of-sample evaluation, the degrees-of-
freedom degeneracy scan, and fitted-vs-observed distribution comparison.

Statistics that cannot be computed (undefined moments, degenerate
regressions, zero out-of-sample likelihood) are reported as None; consumers
render them as the literal "x"."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels as _k
from .dynamics import filter_model
from .errors import (DomainError, FilterDivergedError, ScoreUndefinedError,
                     TickvolError)

__all__ = [
    "EvalResult",
    "NuScanResult",
    "arch_lm",
    "standardized_residuals",
    "evaluate_next_day",
    "nu_scan",
    "fitted_vs_observed",
    "default_nu_grid",
]


@dataclass(frozen=True)
class EvalResult:
    """Next-day evaluation of a frozen fit (None means unavailable)."""

    loglik_avg_oos: float | None
    archlm_oos: float | None
    failed: bool
    underflow_count: int = 0
    n_obs: int = 0


@dataclass(frozen=True)
class NuScanResult:
    """Profile likelihood of the static model over a degrees-of-freedom grid."""

    nu_grid: np.ndarray
    sigma2_hat: np.ndarray
    loglik_avg: np.ndarray
    floored: np.ndarray
    kind: str


def arch_lm(residuals, lags=10):
    """R-squared from regressing squared residuals on their first `lags` lags
    plus an intercept; None when the regression is degenerate."""
    r = np.asarray(residuals, dtype=float)
    if r.ndim != 1 or r.size <= lags + 1:
        raise DomainError(f"need more than {lags + 1} residuals, got {r.size}")
    if not np.all(np.isfinite(r)):
        raise DomainError("residuals must be finite")
    sq = r * r
    yv = sq[lags:]
    cols = [np.ones(yv.size)]
    cols.extend(sq[lags - i - 1: sq.size - i - 1] for i in range(lags))
    x = np.column_stack(cols)
    ss_tot = float(np.sum((yv - yv.mean()) ** 2))
    if ss_tot <= 1e-12 * max(1.0, float(np.sum(yv ** 2))):
        return None
    beta, *_ = np.linalg.lstsq(x, yv, rcond=None)
    ss_res = float(np.sum((yv - x @ beta) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    return float(min(max(r2, 0.0), 1.0))


def standardized_residuals(y, output, spec, params):
    """(y_t - mu_t) / sd_t with the model's conditional standard deviation.

    Returns None when the variance does not exist (t kernel with nu <= 2).
    The zero-inflated Skellam uses the second moment about mu_t,
    (1 - pi) sigma2 + pi mu^2, so residuals variance-match when the model is
    true."""
    arr = np.asarray(getattr(y, "changes", y), dtype=float)
    sigma2 = output.sigma2_path
    mu = output.mu_path
    fam = spec.family
    if fam in ("garch_t", "gas_t", "static_t", "interval_t"):
        nu = params["nu"]
        if nu <= 2.0:
            return None
        sd = np.sqrt(sigma2 * nu / (nu - 2.0))
    elif fam == "interval_normal":
        sd = np.sqrt(sigma2)
    elif fam == "skellam":
        sd = np.sqrt(sigma2)
    elif fam == "zi_skellam":
        pi = params["pi"]
        sd = np.sqrt((1.0 - pi) * sigma2 + pi * mu * mu)
    else:
        raise DomainError(f"no residual definition for family {fam!r}")
    return (arr - mu) / sd


def evaluate_next_day(fit, next_day, s_hat=None, lags=10):
    """Filter the next day with frozen parameters (long-run initial state,
    fit-day profile reused) and report the out-of-sample statistics.

    A day on which any observation's probability underflows to zero is
    flagged failed with the average log-likelihood unavailable."""
    if not fit.converged:
        raise DomainError("cannot evaluate a NOT_CONVERGED fit")
    arr = np.asarray(getattr(next_day, "changes", next_day), dtype=float)
    try:
        out = filter_model(next_day, fit.spec, fit.params, s_hat=s_hat)
    except (FilterDivergedError, ScoreUndefinedError):
        return EvalResult(loglik_avg_oos=None, archlm_oos=None, failed=True,
                          underflow_count=0, n_obs=arr.size)
    failed = out.underflow_count > 0
    ll = None if failed else float(np.mean(out.loglik_terms))
    try:
        resid = standardized_residuals(next_day, out, fit.spec, fit.params)
        a = arch_lm(resid, lags=lags) if resid is not None else None
    except TickvolError:
        a = None
    return EvalResult(loglik_avg_oos=ll, archlm_oos=a, failed=failed,
                      underflow_count=out.underflow_count, n_obs=arr.size)


def default_nu_grid(n_points=40, lo=0.05, hi=50.0):
    return np.logspace(math.log10(lo), math.log10(hi), n_points)


_LN_FLOOR = math.log(_k.SIGMA2_FLOOR)


def nu_scan(y, nu_grid=None, likelihood_kind="continuous_density"):
    """Static-model scan: for each fixed nu, maximize the chosen likelihood
    over ln sigma2 (mu fixed at 0) with sigma2 floored at 2^-1074.

    records whether the floor is the optimum (the degeneracy signature of the
    continuous density on zero-heavy data)."""
    if likelihood_kind not in ("continuous_density", "interval"):
        raise DomainError(f"unknown likelihood_kind {likelihood_kind!r}")
    arr = np.asarray(getattr(y, "changes", y), dtype=float)
    if arr.size == 0:
        raise DomainError("series is empty")
    if nu_grid is None:
        nu_grid = default_nu_grid()
    nu_grid = np.asarray(nu_grid, dtype=float)
    if np.any(nu_grid <= 0.0):
        raise DomainError("nu grid must be positive")

    hi = max(math.log(np.var(arr) + 1.0) + 12.0, 12.0)

    sigma2_hat = np.empty(nu_grid.size)
    ll_avg = np.empty(nu_grid.size)
    floored = np.zeros(nu_grid.size, dtype=bool)

    for i, nu in enumerate(nu_grid):
        if likelihood_kind == "continuous_density":
            def total(ls, nu=nu):
                return float(_k.static_t_density_loglik(
                    arr, max(math.exp(ls), _k.SIGMA2_FLOOR), nu))
        else:
            def total(ls, nu=nu):
                v, _ = _k.static_interval_loglik(
                    arr, max(math.exp(ls), _k.SIGMA2_FLOOR), nu, True)
                return float(v)

        def neg(ls):
            v = total(ls)
            return -v if math.isfinite(v) else 1e15

        res = minimize_scalar(neg, bounds=(_LN_FLOOR, hi), method="bounded",
                              options={"xatol": 1e-9})
        interior_ll = total(res.x)
        floor_ll = total(_LN_FLOOR)
        if floor_ll > interior_ll or res.x <= _LN_FLOOR + 1e-6:
            floored[i] = True
            sigma2_hat[i] = _k.SIGMA2_FLOOR
            ll_avg[i] = floor_ll / arr.size
        else:
            sigma2_hat[i] = math.exp(res.x)
            ll_avg[i] = interior_ll / arr.size

    return NuScanResult(nu_grid=nu_grid, sigma2_hat=sigma2_hat,
                        loglik_avg=ll_avg, floored=floored,
                        kind=likelihood_kind)


def _model_prob(k, mu, sigma2, spec, params):
    fam = spec.family
    if fam in ("interval_t", "static_t", "garch_t", "gas_t"):
        return math.exp(_k.interval_term(k - mu, sigma2, params["nu"], True)[0])
    if fam == "interval_normal":
        return math.exp(_k.interval_term(k - mu, sigma2, 0.0, False)[0])
    if fam == "skellam":
        return math.exp(_k.skellam_logpmf_k(k, mu, sigma2))
    if fam == "zi_skellam":
        return math.exp(_k.zi_skellam_logpmf_k(k, mu, sigma2, params["pi"]))
    raise DomainError(f"no probability definition for family {fam!r}")


def fitted_vs_observed(fit, y, support=None, s_hat=None):
    """Signed difference (empirical frequency - mean fitted probability) for
    each integer in the support."""
    arr = np.asarray(getattr(y, "changes", y), dtype=float)
    if support is None:
        support = np.arange(int(arr.min()), int(arr.max()) + 1)
    support = np.asarray(support, dtype=int)
    out = filter_model(y, fit.spec, fit.params, s_hat=s_hat)
    diffs = np.empty(support.size)
    n = arr.size
    for j, k in enumerate(support):
        emp = float(np.mean(arr == k))
        acc = 0.0
        for t in range(n):
            acc += _model_prob(float(k), out.mu_path[t], out.sigma2_path[t],
                               fit.spec, fit.params)
        diffs[j] = emp - acc / n
    return support, diffs
