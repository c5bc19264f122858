"""Maximum-likelihood engine: parameter transforms, numerical optimization,
per-day fits and cross-day median summaries.

Estimation works on an unconstrained reparameterization of each family's
admissible region (open intervals; boundary values are rejected exactly).
The optimizer is a deterministic simplex descent followed by a quasi-Newton
polish with central-difference gradients; per-day fits run it from five
fixed dispersed starting points and keep the best.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import diagnose
from ._kernels import SIGMA2_FLOOR
from .dynamics import ModelSpec, ParamVector, filter_model, loglik
from .errors import DomainError, TickvolError

__all__ = [
    "BoundRegime",
    "REGIME_PRESETS",
    "FitResult",
    "FitSummary",
    "OptimResult",
    "transform",
    "untransform",
    "optimize",
    "fit_day",
    "fit_all_days",
    "summarize_fits",
]

OMEGA_LIM = 35.0   # log-variance intercepts live in (-35, 35)
MIN_SERIES_LEN = 50

REGIME_PRESETS = {
    "rugarch-like": 2.1,
    "fgarch-like": 2.0,
    "gas-like": 4.0,
    "unbounded": 0.0,
}


@dataclass(frozen=True)
class BoundRegime:
    """Bound conventions mirrored from the surveyed estimation packages."""

    name: str
    nu_lower: float = 0.0
    alpha_nonneg: bool = False
    garch_stationarity: bool = True

    @classmethod
    def preset(cls, name, alpha_nonneg=False):
        if name not in REGIME_PRESETS:
            raise DomainError(f"unknown regime {name!r}; "
                              f"expected one of {sorted(REGIME_PRESETS)}")
        return cls(name=name, nu_lower=REGIME_PRESETS[name],
                   alpha_nonneg=alpha_nonneg)


@dataclass(frozen=True)
class OptimResult:
    x: np.ndarray
    fun: float
    iterations: int
    objective_evals: int
    converged: bool
    budget_exhausted: bool
    history: tuple = ()


@dataclass(frozen=True)
class FitResult:
    """Converged parameter point and bookkeeping for one day."""

    spec: ModelSpec
    regime: BoundRegime
    params: ParamVector
    loglik_avg: float
    converged: bool
    iterations: int
    objective_evals: int
    at_bound: tuple
    sigma2_floored: bool
    n_obs: int
    underflow_count: int = 0
    day: str = ""

    def to_json_dict(self):
        return {
            "day": self.day,
            "model": self.spec.cli_name,
            "regime": self.regime.name,
            "params": {k: float(v) for k, v in self.params.as_dict().items()},
            "loglik_avg": float(self.loglik_avg),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "objective_evals": int(self.objective_evals),
            "at_bound": sorted(self.at_bound),
            "sigma2_floored": bool(self.sigma2_floored),
            "n_obs": int(self.n_obs),
            "underflow_count": int(self.underflow_count),
        }

    def to_json(self):
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json_dict(cls, doc):
        spec = ModelSpec.from_cli_name(doc["model"])
        regime = BoundRegime.preset(doc["regime"])
        return cls(
            spec=spec,
            regime=regime,
            params=ParamVector.from_dict(spec, doc["params"]),
            loglik_avg=float(doc["loglik_avg"]),
            converged=bool(doc["converged"]),
            iterations=int(doc["iterations"]),
            objective_evals=int(doc["objective_evals"]),
            at_bound=tuple(doc["at_bound"]),
            sigma2_floored=bool(doc["sigma2_floored"]),
            n_obs=int(doc["n_obs"]),
            underflow_count=int(doc.get("underflow_count", 0)),
            day=str(doc.get("day", "")),
        )


@dataclass(frozen=True)
class FitSummary:
    """Cross-day medians with per-statistic exclusion counts."""

    medians: dict
    excluded: dict
    n_days: int
    n_not_converged: int


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def _fwd_log(v, lo=0.0):
    if v <= lo:
        raise DomainError(f"value {v} must exceed {lo}")
    return math.log(v - lo)


def _fwd_atanh(v, lim=1.0):
    if abs(v) >= lim:
        raise DomainError(f"|{v}| must be < {lim}")
    return lim * math.atanh(v / lim)


def _fwd_logit(v):
    if not 0.0 < v < 1.0:
        raise DomainError(f"value {v} must lie strictly inside (0, 1)")
    return math.log(v / (1.0 - v))


def _bwd_sigmoid(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def transform(p, spec, regime):
    """Map an admissible ParamVector to the unconstrained space (bijective)."""
    d = p.as_dict()
    fam = spec.family
    out = []
    if fam == "garch_t":
        out.append(d["mu"])
        out.append(_fwd_log(d["omega"]))
        if regime.garch_stationarity:
            rest = 1.0 - d["alpha"] - d["phi"]
            if d["alpha"] <= 0.0 or d["phi"] <= 0.0 or rest <= 0.0:
                raise DomainError("need alpha > 0, phi > 0, alpha + phi < 1")
            out.append(math.log(d["alpha"] / rest))
            out.append(math.log(d["phi"] / rest))
        else:
            out.append(_fwd_log(d["alpha"]))
            out.append(_fwd_log(d["phi"]))
        out.append(_fwd_log(d["nu"], regime.nu_lower))
        return np.asarray(out)
    if fam == "gas_t":
        out.append(d["mu"])
        out.append(_fwd_atanh(d["omega"], OMEGA_LIM))
        out.append(_fwd_log(d["alpha"]) if regime.alpha_nonneg else d["alpha"])
        out.append(_fwd_atanh(d["phi"]))
        out.append(_fwd_log(d["nu"], regime.nu_lower))
        return np.asarray(out)
    if fam == "static_t":
        out.append(_fwd_log(d["sigma2"]))
        out.append(_fwd_log(d["nu"], regime.nu_lower))
        return np.asarray(out)
    # interval families
    out.append(_fwd_atanh(d["theta"]))
    out.append(_fwd_atanh(d["omega"], OMEGA_LIM))
    out.append(_fwd_log(d["alpha"]) if regime.alpha_nonneg else d["alpha"])
    out.append(_fwd_atanh(d["phi"]))
    if "nu" in p.names:
        out.append(_fwd_log(d["nu"], regime.nu_lower))
    if "pi" in p.names:
        out.append(_fwd_logit(d["pi"]))
    return np.asarray(out)


def untransform(x, spec, regime):
    """Inverse of `transform`; raises DomainError on non-finite images."""
    x = np.asarray(x, dtype=float)
    fam = spec.family
    names = spec.param_names
    if x.shape != (len(names),):
        raise DomainError(f"expected {len(names)} coordinates, got {x.shape}")
    if fam == "garch_t":
        if regime.garch_stationarity:
            ea, eb = math.exp(x[2]), math.exp(x[3])
            den = 1.0 + ea + eb
            alpha, phi = ea / den, eb / den
        else:
            alpha, phi = math.exp(x[2]), math.exp(x[3])
        vals = {"mu": x[0], "omega": math.exp(x[1]), "alpha": alpha,
                "phi": phi, "nu": regime.nu_lower + math.exp(x[4])}
    elif fam == "gas_t":
        vals = {"mu": x[0],
                "omega": OMEGA_LIM * math.tanh(x[1] / OMEGA_LIM),
                "alpha": math.exp(x[2]) if regime.alpha_nonneg else x[2],
                "phi": math.tanh(x[3]),
                "nu": regime.nu_lower + math.exp(x[4])}
    elif fam == "static_t":
        vals = {"sigma2": max(math.exp(x[0]), SIGMA2_FLOOR),
                "nu": regime.nu_lower + math.exp(x[1])}
    else:
        vals = {"theta": math.tanh(x[0]),
                "omega": OMEGA_LIM * math.tanh(x[1] / OMEGA_LIM),
                "alpha": math.exp(x[2]) if regime.alpha_nonneg else x[2],
                "phi": math.tanh(x[3])}
        pos = 4
        if "nu" in names:
            vals["nu"] = regime.nu_lower + math.exp(x[pos])
            pos += 1
        if "pi" in names:
            vals["pi"] = _bwd_sigmoid(x[pos])
    return ParamVector.from_dict(spec, vals)


_BOUND_RULES = {
    # name -> (lower threshold on x, upper threshold on x)
    "theta": (-12.0, 12.0),
    "phi": (-12.0, 12.0),
    "pi": (-12.0, 12.0),
    "nu": (-10.0, 30.0),
    "sigma2": (math.log(SIGMA2_FLOOR) + 1.0, 60.0),
}


def detect_at_bound(x, spec, regime):
    """Parameter names whose unconstrained coordinate is pinned at a
    transform bound (degenerate corner of the admissible region)."""
    x = np.asarray(x, dtype=float)
    names = spec.param_names
    fam = spec.family
    flagged = set()
    for i, name in enumerate(names):
        xi = x[i]
        if name == "mu":
            continue
        if name == "omega":
            if fam == "garch_t":
                if xi < -28.0:
                    flagged.add("omega")
            else:
                omega = OMEGA_LIM * math.tanh(xi / OMEGA_LIM)
                # below exp(-20) cents^2 the intercept is pinned at the
                # degenerate corner for integer data
                if omega < -20.0 or omega > OMEGA_LIM - 0.1:
                    flagged.add("omega")
            continue
        if name == "alpha":
            if (fam == "garch_t" and regime.garch_stationarity) or regime.alpha_nonneg:
                if xi < -25.0 or xi > 25.0:
                    flagged.add("alpha")
            continue
        if name == "phi" and fam == "garch_t":
            if regime.garch_stationarity and (xi < -25.0 or xi > 25.0):
                flagged.add("phi")
            continue
        lo, hi = _BOUND_RULES.get(name, (-math.inf, math.inf))
        if xi < lo or xi > hi:
            flagged.add(name)
    return flagged


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------

def _central_diff_jac(func, rel_step=1e-6):
    def jac(x):
        g = np.empty(x.size)
        for i in range(x.size):
            h = rel_step * max(1.0, abs(x[i]))
            xp = x.copy()
            xm = x.copy()
            xp[i] += h
            xm[i] -= h
            g[i] = (func(xp) - func(xm)) / (2.0 * h)
        return g
    return jac


def optimize(objective, x0, budget=20000):
    """Minimize a scalar objective: Nelder-Mead descent, then a BFGS polish
    with central-difference gradients (step 1e-6 * max(1, |x|)).

    Non-finite objective values are treated as a large penalty so probe
    points near cliffs are rejected without stopping the search. The
    returned history is the running best objective per evaluation (monotone
    nonincreasing by construction).
    """
    x0 = np.asarray(x0, dtype=float)
    evals = [0]
    best = [math.inf]
    history = []

    def wrapped(x):
        evals[0] += 1
        try:
            v = objective(np.asarray(x, dtype=float))
        except TickvolError:
            v = math.inf
        if not np.isfinite(v):
            v = 1e12
        if v < best[0]:
            best[0] = v
        history.append(best[0])
        return v

    nm_budget = max(100, int(budget * 0.6))
    nm = minimize(wrapped, x0, method="Nelder-Mead",
                  options={"maxfev": nm_budget, "fatol": 1e-9,
                           "xatol": 1e-7, "adaptive": True})
    x_best, f_best = nm.x, nm.fun
    iterations = nm.nit
    converged = bool(nm.success)

    remaining = budget - evals[0]
    d = x0.size
    if remaining > 4 * d + 12 and np.isfinite(f_best):
        jac = _central_diff_jac(wrapped)
        # each quasi-Newton iteration costs roughly a gradient (2d) plus a
        # short line search, so cap iterations by the remaining budget
        maxiter = max(1, remaining // (4 * d + 12))
        try:
            qb = minimize(wrapped, x_best, method="BFGS", jac=jac,
                          options={"gtol": 1e-6, "maxiter": maxiter})
            if np.isfinite(qb.fun) and qb.fun <= f_best:
                x_best, f_best = qb.x, qb.fun
                converged = converged or bool(qb.success)
            iterations += qb.nit
        except (ValueError, FloatingPointError):
            pass

    # NOT_CONVERGED is reserved for genuine failure: a non-finite optimum or
    # a budget that ran out while the objective was still moving materially
    tail = max(20, len(history) // 10)
    still_moving = (len(history) > tail
                    and (history[-tail] - history[-1]) > 1e-6)
    budget_exhausted = evals[0] >= budget
    converged = (converged or not (budget_exhausted and still_moving))
    converged = converged and np.isfinite(f_best) and f_best < 1e11

    return OptimResult(
        x=np.asarray(x_best, dtype=float),
        fun=float(f_best),
        iterations=int(iterations),
        objective_evals=int(evals[0]),
        converged=converged,
        budget_exhausted=budget_exhausted,
        history=tuple(history),
    )


# ---------------------------------------------------------------------------
# per-day fitting
# ---------------------------------------------------------------------------

def _start_points(spec, regime, y):
    """Five fixed dispersed starts (natural space), anchored on the sample
    variance so runs stay reproducible for identical inputs."""
    arr = np.asarray(getattr(y, "changes", y), dtype=float)
    v = max(float(np.var(arr)), 0.25)
    lw = math.log(min(v, math.exp(OMEGA_LIM - 1.0)))
    nu_lo = regime.nu_lower

    def nu_at(target):
        return max(target, nu_lo + 0.75)

    fam = spec.family
    if fam == "garch_t":
        m = float(np.mean(arr))
        base = [
            {"mu": m, "omega": 0.10 * v, "alpha": 0.05, "phi": 0.90, "nu": nu_at(8.0)},
            {"mu": m, "omega": 0.05 * v, "alpha": 0.10, "phi": 0.85, "nu": nu_at(5.0)},
            {"mu": 0.0, "omega": 0.30 * v, "alpha": 0.02, "phi": 0.60, "nu": nu_at(20.0)},
            {"mu": m, "omega": 0.90 * v, "alpha": 0.04, "phi": 0.05, "nu": nu_at(3.0)},
            {"mu": 0.0, "omega": 0.02 * v, "alpha": 0.15, "phi": 0.80, "nu": nu_at(2.5)},
        ]
    elif fam == "gas_t":
        m = float(np.mean(arr))
        base = [
            {"mu": m, "omega": 0.1 * lw, "alpha": 0.05, "phi": 0.90, "nu": nu_at(8.0)},
            {"mu": m, "omega": 0.03 * lw, "alpha": 0.10, "phi": 0.97, "nu": nu_at(5.0)},
            {"mu": 0.0, "omega": 0.5 * lw, "alpha": 0.02, "phi": 0.50, "nu": nu_at(20.0)},
            {"mu": m, "omega": lw, "alpha": 0.01, "phi": 0.05, "nu": nu_at(3.0)},
            {"mu": 0.0, "omega": 0.02 * lw, "alpha": 0.20, "phi": 0.98, "nu": nu_at(2.5)},
        ]
    elif fam == "static_t":
        base = [
            {"sigma2": v, "nu": nu_at(8.0)},
            {"sigma2": v, "nu": nu_at(2.5)},
            {"sigma2": 0.25 * v, "nu": nu_at(1.0)},
            {"sigma2": 4.0 * v, "nu": nu_at(20.0)},
            {"sigma2": 0.05 * v, "nu": nu_at(0.8)},
        ]
    else:
        base = [
            {"theta": 0.0, "omega": lw, "alpha": 0.05, "phi": 0.90},
            {"theta": -0.3, "omega": lw, "alpha": 0.02, "phi": 0.97},
            {"theta": 0.0, "omega": lw - 1.0, "alpha": 0.20, "phi": 0.50},
            {"theta": 0.2, "omega": lw + 0.5, "alpha": 0.01, "phi": 0.99},
            {"theta": -0.5, "omega": lw, "alpha": 0.10, "phi": 0.80},
        ]
        extras = {"nu": [8.0, 8.0, 3.0, 20.0, 1.5], "pi": [0.10, 0.02, 0.30, 0.005, 0.50]}
        for i, b in enumerate(base):
            if "nu" in spec.param_names:
                b["nu"] = nu_at(extras["nu"][i])
            if "pi" in spec.param_names:
                b["pi"] = extras["pi"][i]
    return [ParamVector.from_dict(spec, b) for b in base]


def fit_day(y, spec, regime, s_hat=None, budget=4000, min_obs=MIN_SERIES_LEN,
            extra_starts=()):
    """Maximize the model log-likelihood on one day of data.

    Deterministic: a short simplex triage from each of five fixed starting
    points (plus any extra_starts), then the full simplex-plus-polish run
    from the triage winner. The zero-inflated Skellam fit is additionally
    warm-started from its own nested Skellam fit so that freeing pi can
    never lose likelihood against the restricted model. A NOT_CONVERGED
    result carries the best point found.
    """
    arr = np.asarray(getattr(y, "changes", y), dtype=float)
    if arr.size < min_obs:
        raise DomainError(f"need at least {min_obs} observations, got {arr.size}")
    n = arr.size

    extra_starts = list(extra_starts)
    if spec.family == "zi_skellam" and not extra_starts:
        # warm-start from the nested pi=0 model at the same budget: the free
        # fit then dominates the restricted fit by construction
        nested = fit_day(y, ModelSpec("skellam"), regime, s_hat=s_hat,
                         budget=budget, min_obs=min_obs)
        warm = dict(nested.params.as_dict())
        warm["pi"] = 1e-7
        extra_starts.append(ParamVector.from_dict(spec, warm))

    evals = [0]

    def objective(x):
        evals[0] += 1
        p = untransform(x, spec, regime)
        return -loglik(y, spec, p, s_hat=s_hat) / n

    def safe(x):
        try:
            v = objective(x)
        except TickvolError:
            return 1e12
        return v if np.isfinite(v) else 1e12

    starts = []
    for p0 in list(_start_points(spec, regime, y)) + extra_starts:
        try:
            starts.append(transform(p0, spec, regime))
        except DomainError:
            continue
    if not starts:
        raise DomainError("no admissible starting point for this regime")

    triage_each = max(60, int(budget * 0.45) // len(starts))
    candidates = []
    iterations = 0
    for x0 in starts:
        nm = minimize(safe, x0, method="Nelder-Mead",
                      options={"maxfev": triage_each, "fatol": 1e-8,
                               "xatol": 1e-5, "adaptive": True})
        iterations += nm.nit
        candidates.append((nm.fun, nm.x))
    x_best = min(candidates, key=lambda c: c[0])[1]

    remaining = max(200, budget - evals[0])
    final = optimize(objective, x_best, budget=remaining)
    iterations += final.iterations

    params = untransform(final.x, spec, regime)
    converged = final.converged and math.isfinite(final.fun) and final.fun < 1e11

    underflow = 0
    if converged and spec.family != "static_t":
        out = filter_model(y, spec, params, s_hat=s_hat)
        underflow = out.underflow_count

    floored = (spec.family == "static_t"
               and params["sigma2"] <= SIGMA2_FLOOR * (1.0 + 1e-9))

    return FitResult(
        spec=spec,
        regime=regime,
        params=params,
        loglik_avg=-final.fun if math.isfinite(final.fun) else -math.inf,
        converged=converged,
        iterations=int(iterations),
        objective_evals=int(evals[0]),
        at_bound=tuple(sorted(detect_at_bound(final.x, spec, regime))),
        sigma2_floored=bool(floored),
        n_obs=n,
        underflow_count=underflow,
        day=str(getattr(y, "day", "")),
    )


def _arch_stat(y, fit, s_hat):
    try:
        out = filter_model(y, fit.spec, fit.params, s_hat=s_hat)
        resid = diagnose.standardized_residuals(y, out, fit.spec, fit.params)
        if resid is None:
            return None
        return diagnose.arch_lm(resid)
    except TickvolError:
        return None


def fit_all_days(days, spec, regime, profiles=None, threads=1, budget=4000,
                 min_obs=MIN_SERIES_LEN):
    """Fit each day independently and summarize with medians.

    profiles may be None, a single profile reused for every day, or a list
    aligned with days. Days that fail to converge (or whose diagnostic is
    undefined) are excluded from the affected medians and counted.
    """
    days = list(days)
    if not days:
        raise DomainError("need at least one day")
    if profiles is None or hasattr(profiles, "eval"):
        profiles = [profiles] * len(days)
    if len(profiles) != len(days):
        raise DomainError("profiles must align with days")

    def run(pair):
        series, prof = pair
        return fit_day(series, spec, regime, s_hat=prof, budget=budget,
                       min_obs=min_obs)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            fits = list(pool.map(run, zip(days, profiles)))
    else:
        fits = [run(pair) for pair in zip(days, profiles)]

    arch_stats = [_arch_stat(series, f, prof) if f.converged else None
                  for series, prof, f in zip(days, profiles, fits)]
    return fits, summarize_fits(fits, arch_stats)


def summarize_fits(fits, arch_stats=None):
    """Median summary across days; NOT_CONVERGED days and unavailable
    diagnostics are excluded from the affected medians and counted."""
    fits = list(fits)
    if not fits:
        raise DomainError("need at least one fit")
    if arch_stats is None:
        arch_stats = [None] * len(fits)
    spec = fits[0].spec

    n_bad = sum(1 for f in fits if not f.converged)
    medians = {}
    excluded = {}
    for name in spec.param_names:
        vals = [f.params[name] for f in fits if f.converged]
        medians[name] = float(np.median(vals)) if vals else None
        excluded[name] = len(fits) - len(vals)

    ll = [f.loglik_avg for f in fits if f.converged and math.isfinite(f.loglik_avg)]
    medians["loglik"] = float(np.median(ll)) if ll else None
    excluded["loglik"] = len(fits) - len(ll)

    arch = [a for f, a in zip(fits, arch_stats) if f.converged and a is not None]
    medians["A"] = float(np.median(arch)) if arch else None
    excluded["A"] = len(fits) - len(arch)

    return FitSummary(medians=medians, excluded=excluded,
                      n_days=len(fits), n_not_converged=n_bad)
