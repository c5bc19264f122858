"""Synthetic data generation and brute-force oracles.

The simulator runs the same state recursions as `dynamics.filter_interval`
forward, drawing each observation from the model's conditional distribution.
Randomness comes from numpy's counter-based Philox generator keyed by
(seed, day index), so output is bit-identical across runs and platforms and
independent of scheduling.

The oracle functions are deliberately independent of `_kernels` (direct
convolution and adaptive quadrature); they exist for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import _kernels as _k
from .dynamics import ModelSpec, ParamVector, resolve_lnshat
from .errors import DomainError
from .pipeline import SESSION_SECONDS, ChangeSeries

__all__ = ["SimSpec", "simulate", "oracle_skellam_pmf", "oracle_interval_prob"]


@dataclass(frozen=True)
class SimSpec:
    """What to simulate: model family, parameter point, shape and seed."""

    model: ModelSpec
    params: ParamVector
    n: int
    days: int = 1
    seed: int = 0
    diurnal: object = None

    def __post_init__(self):
        if not self.model.is_interval_family:
            raise DomainError(
                f"simulation covers the interval/Skellam families, not {self.model.family}")
        if self.n < 2:
            raise DomainError(f"n must be >= 2, got {self.n}")
        if self.days < 1:
            raise DomainError(f"days must be >= 1, got {self.days}")


def _day_generator(seed, day_index):
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, day_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def simulate(spec):
    """Generate one ChangeSeries per day from the model's own recursions."""
    d = spec.params.as_dict()
    theta = d["theta"]
    omega = d["omega"]
    alpha = d["alpha"]
    phi = d["phi"]
    nu = d.get("nu", 0.0) or 0.0
    pi = d.get("pi", 0.0) or 0.0
    kind = spec.model.dist_kind
    code = {"normal": _k.DIST_NORMAL, "t": _k.DIST_T,
            "skellam": _k.DIST_SKELLAM, "zi_skellam": _k.DIST_ZI_SKELLAM}[kind]

    step = SESSION_SECONDS / spec.n
    times = np.arange(1, spec.n + 1, dtype=float) * step

    out = []
    for day_index in range(spec.days):
        lnshat = resolve_lnshat(spec.diurnal, _TimeStub(times), spec.n)
        gen = _day_generator(spec.seed, day_index)
        y = np.empty(spec.n)
        mu = 0.0
        e = 0.0
        for t in range(spec.n):
            sigma2 = math.exp(omega + lnshat[t] + e)
            if code >= _k.DIST_SKELLAM:
                # same flooring as the filter recursion
                lo = abs(mu) * (1.0 + 1e-12)
                if sigma2 < lo:
                    sigma2 = lo
            if code == _k.DIST_NORMAL:
                y_t = float(np.rint(mu + math.sqrt(sigma2) * gen.standard_normal()))
            elif code == _k.DIST_T:
                # ratio form stays valid for every nu > 0
                eps = gen.standard_normal() / math.sqrt(gen.chisquare(nu) / nu)
                y_t = float(np.rint(mu + math.sqrt(sigma2) * eps))
            else:
                lam1 = 0.5 * (sigma2 + mu)
                lam2 = 0.5 * (sigma2 - mu)
                if code == _k.DIST_ZI_SKELLAM and gen.random() < pi:
                    y_t = 0.0
                else:
                    y_t = float(gen.poisson(lam1)) - float(gen.poisson(lam2))
            _, score, flag = _k._obs_term(y_t, mu, sigma2, nu, pi, code)
            if flag != _k.FLAG_OK:
                score = 0.0
            y[t] = y_t
            e = alpha * score + phi * e
            mu = theta * (y_t - mu)
        out.append(ChangeSeries(
            changes=y.astype(np.int64),
            time_of_day=times.copy(),
            day=f"sim-{day_index + 1:03d}",
            frequency=step,
        ))
    return out


class _TimeStub:
    """Minimal series-like wrapper so resolve_lnshat can query time stamps."""

    def __init__(self, times):
        self.time_of_day = times


def oracle_skellam_pmf(k, lam1, lam2, truncation=400):
    """P(N1 - N2 = k) by direct convolution of two Poisson pmfs.

    Test oracle only; raises if the truncated sum leaves more than ~1e-12
    relative tail mass.
    """
    if lam1 < 0.0 or lam2 < 0.0:
        raise DomainError("rates must be nonnegative")
    k = int(k)
    if lam2 == 0.0:
        return math.exp(_log_pois(k, lam1)) if k >= 0 else 0.0
    if lam1 == 0.0:
        return math.exp(_log_pois(-k, lam2)) if k <= 0 else 0.0
    j0 = max(0, k)
    total = 0.0
    term = 0.0
    for j in range(j0, j0 + truncation + 1):
        term = math.exp(_log_pois(j, lam1) + _log_pois(j - k, lam2))
        total += term
    if total > 0.0 and term > 1e-13 * total:
        raise DomainError(f"truncation {truncation} too small for rates "
                          f"({lam1}, {lam2})")
    return total


def _log_pois(j, lam):
    if j < 0:
        return -math.inf
    if lam == 0.0:
        return 0.0 if j == 0 else -math.inf
    return j * math.log(lam) - lam - math.lgamma(j + 1)


def oracle_interval_prob(y, mu, sigma2, nu=None):
    """P(y-0.5 < X <= y+0.5) by adaptive quadrature of the scaled density."""
    if sigma2 <= 0.0:
        raise DomainError("sigma2 must be positive")
    sigma = math.sqrt(sigma2)
    if nu is None:
        def dens(x):
            z = (x - mu) / sigma
            return math.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))
    else:
        lognorm = (math.lgamma(0.5 * (nu + 1.0)) - math.lgamma(0.5 * nu)
                   - 0.5 * math.log(nu * math.pi) - math.log(sigma))

        def dens(x):
            z = (x - mu) / sigma
            return math.exp(lognorm - 0.5 * (nu + 1.0) * math.log1p(z * z / nu))

    val, _ = quad(dens, y - 0.5, y + 0.5, epsabs=1e-13, epsrel=1e-11, limit=200)
    return val
