"""Probability kernels for integer price changes.

Student's t, normal, Skellam and zero-inflated Skellam distributions:
densities/pmfs, probabilities of the rounding interval (y-0.5, y+0.5], and
scores with respect to ln sigma2. All functions are pure and thread-safe.

Log-probabilities may be -inf when the interval probability underflows to
zero in double precision; callers that need to distinguish underflow from a
genuine zero can test with `math.isinf`. Scores raise ScoreUndefinedError in
that situation instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _kernels as _k
from .errors import DomainError, ScoreUndefinedError

__all__ = [
    "TParams",
    "SkellamParams",
    "ZiSkellamParams",
    "t_pdf",
    "t_cdf",
    "interval_logprob",
    "interval_score_lnsigma2",
    "t_density_score_lnsigma2",
    "skellam_logpmf",
    "skellam_score_lnsigma2",
    "zi_skellam_logpmf",
    "zi_skellam_score_lnsigma2",
]


def _require_finite(name, value):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")


def _require_integer(name, value):
    if not float(value).is_integer():
        raise DomainError(f"{name} must be integer-valued, got {value!r}")


@dataclass(frozen=True)
class TParams:
    """Location, scale and degrees of freedom of a location-scale t."""

    mu: float
    sigma2: float
    nu: float

    def __post_init__(self):
        _require_finite("mu", self.mu)
        _require_finite("sigma2", self.sigma2)
        _require_finite("nu", self.nu)
        if self.sigma2 <= 0.0:
            raise DomainError(f"sigma2 must be positive, got {self.sigma2}")
        if self.nu <= 0.0:
            raise DomainError(f"nu must be positive, got {self.nu}")


@dataclass(frozen=True)
class SkellamParams:
    """Mean/variance parameterization of the Skellam distribution.

    The implied Poisson rates are lam1 = (sigma2 + mu) / 2 and
    lam2 = (sigma2 - mu) / 2, so sigma2 >= |mu| is required.
    """

    mu: float
    sigma2: float

    def __post_init__(self):
        _require_finite("mu", self.mu)
        _require_finite("sigma2", self.sigma2)
        if self.sigma2 <= 0.0:
            raise DomainError(f"sigma2 must be positive, got {self.sigma2}")
        if self.sigma2 < abs(self.mu):
            raise DomainError(
                f"sigma2 must be >= |mu| (got sigma2={self.sigma2}, mu={self.mu})")

    @property
    def lam1(self):
        return 0.5 * (self.sigma2 + self.mu)

    @property
    def lam2(self):
        return 0.5 * (self.sigma2 - self.mu)


@dataclass(frozen=True)
class ZiSkellamParams:
    """Skellam base distribution with extra probability pi on zero."""

    base: SkellamParams
    pi: float

    def __post_init__(self):
        _require_finite("pi", self.pi)
        if not 0.0 <= self.pi < 1.0:
            raise DomainError(f"pi must be in [0, 1), got {self.pi}")


def t_pdf(x, nu):
    """Density of the standardized Student's t at x."""
    _require_finite("x", x)
    if not (nu > 0.0) or not math.isfinite(nu):
        raise DomainError(f"nu must be positive and finite, got {nu!r}")
    return _k.t_pdf_k(float(x), float(nu))


def t_cdf(x, nu):
    """CDF of the standardized Student's t, via the regularized incomplete beta."""
    _require_finite("x", x)
    if not (nu > 0.0) or not math.isfinite(nu):
        raise DomainError(f"nu must be positive and finite, got {nu!r}")
    return _k.t_cdf_k(float(x), float(nu))


def _check_interval_args(y, mu, sigma2, nu):
    _require_finite("y", y)
    _require_integer("y", y)
    _require_finite("mu", mu)
    _require_finite("sigma2", sigma2)
    if sigma2 <= 0.0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    if nu is not None and (not math.isfinite(nu) or nu <= 0.0):
        raise DomainError(f"nu must be positive and finite or None, got {nu!r}")


def interval_logprob(y, mu, sigma2, nu=None):
    """log P(y - 0.5 < X <= y + 0.5) for X ~ mu + sigma * (t_nu or N(0,1)).

    nu=None selects the standard normal kernel. Returns -inf when the
    probability underflows to zero (the UNDERFLOW contract, no exception).
    """
    _check_interval_args(y, mu, sigma2, nu)
    use_t = nu is not None
    lp, _, flag = _k.interval_term(float(y) - float(mu), float(sigma2),
                                   float(nu) if use_t else 0.0, use_t)
    if flag == _k.FLAG_UNDERFLOW:
        return -math.inf
    return lp


def interval_score_lnsigma2(y, mu, sigma2, nu=None):
    """d interval_logprob / d ln sigma2 at an integer observation y."""
    _check_interval_args(y, mu, sigma2, nu)
    use_t = nu is not None
    _, score, flag = _k.interval_term(float(y) - float(mu), float(sigma2),
                                      float(nu) if use_t else 0.0, use_t)
    if flag != _k.FLAG_OK:
        raise ScoreUndefinedError(
            f"interval probability underflowed at y={y}, mu={mu}, sigma2={sigma2}")
    return score


def t_density_score_lnsigma2(y, mu, sigma2, nu):
    """d log of the continuous location-scale t density / d ln sigma2."""
    _require_finite("y", y)
    _require_finite("mu", mu)
    _require_finite("sigma2", sigma2)
    if sigma2 <= 0.0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    if not (nu > 0.0) or not math.isfinite(nu):
        raise DomainError(f"nu must be positive and finite, got {nu!r}")
    return _k.t_density_score(float(y) - float(mu), float(sigma2), float(nu))


def skellam_logpmf(k, params):
    """log pmf of the Skellam distribution at integer k."""
    _require_finite("k", k)
    _require_integer("k", k)
    return _k.skellam_logpmf_k(float(k), params.mu, params.sigma2)


def skellam_score_lnsigma2(k, params):
    """d skellam_logpmf / d ln sigma2; requires sigma2 > |mu| (interior)."""
    _require_finite("k", k)
    _require_integer("k", k)
    if params.sigma2 <= abs(params.mu):
        raise ScoreUndefinedError(
            f"score undefined at the boundary sigma2 = |mu| = {params.sigma2}")
    score, flag = _k.skellam_score_k(float(k), params.mu, params.sigma2)
    if flag != _k.FLAG_OK:
        raise ScoreUndefinedError(
            f"Skellam score failed at k={k}, mu={params.mu}, sigma2={params.sigma2}")
    return score


def zi_skellam_logpmf(k, params):
    """log pmf of the zero-inflated Skellam at integer k."""
    _require_finite("k", k)
    _require_integer("k", k)
    return _k.zi_skellam_logpmf_k(float(k), params.base.mu, params.base.sigma2,
                                  params.pi)


def zi_skellam_score_lnsigma2(k, params):
    """d zi_skellam_logpmf / d ln sigma2 (pi held fixed)."""
    _require_finite("k", k)
    _require_integer("k", k)
    base = params.base
    if base.sigma2 <= abs(base.mu):
        raise ScoreUndefinedError(
            f"score undefined at the boundary sigma2 = |mu| = {base.sigma2}")
    score, flag = _k.zi_skellam_score_k(float(k), base.mu, base.sigma2, params.pi)
    if flag != _k.FLAG_OK:
        raise ScoreUndefinedError(
            f"zero-inflated Skellam score failed at k={k}")
    return score
