"""Filter recursions for the volatility model families.

Maps a parameter vector and an observation series to per-observation paths of
mu_t, sigma2_t, the dynamic component e_t, scores and log-likelihood
contributions. Families:

  garch_t          variance recursion with continuous scaled-t densities
  gas_t            score-driven ln sigma2 with the continuous t score
  static_t         constant sigma2, continuous t density (degeneracy scans)
  interval_normal  MA(1) location + score-driven ln sigma2, rounding-interval
  interval_t       probabilities of the normal / t kernel
  skellam          same dynamics with the Skellam pmf
  zi_skellam       same dynamics with the zero-inflated Skellam pmf

Filters are deterministic pure functions; independent series may be filtered
concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .errors import DomainError, FilterDivergedError, ScoreUndefinedError

__all__ = [
    "FAMILIES",
    "ModelSpec",
    "ParamVector",
    "GarchParams",
    "GasContParams",
    "IntervalModelParams",
    "FilterOutput",
    "filter_garch",
    "filter_gas_continuous",
    "filter_interval",
    "filter_model",
    "loglik",
    "loglik_mean",
    "resolve_lnshat",
]

_PARAM_NAMES = {
    "garch_t": ("mu", "omega", "alpha", "phi", "nu"),
    "gas_t": ("mu", "omega", "alpha", "phi", "nu"),
    "static_t": ("sigma2", "nu"),
    "interval_normal": ("theta", "omega", "alpha", "phi"),
    "interval_t": ("theta", "omega", "alpha", "phi", "nu"),
    "skellam": ("theta", "omega", "alpha", "phi"),
    "zi_skellam": ("theta", "omega", "alpha", "phi", "pi"),
}

FAMILIES = tuple(_PARAM_NAMES)

_CLI_NAMES = {
    "garch-t": "garch_t",
    "gas-t": "gas_t",
    "static-t": "static_t",
    "normal": "interval_normal",
    "t": "interval_t",
    "skellam": "skellam",
    "zi-skellam": "zi_skellam",
}

_DIST_KIND = {
    "interval_normal": "normal",
    "interval_t": "t",
    "skellam": "skellam",
    "zi_skellam": "zi_skellam",
}

_DIST_CODES = {
    "normal": _k.DIST_NORMAL,
    "t": _k.DIST_T,
    "skellam": _k.DIST_SKELLAM,
    "zi_skellam": _k.DIST_ZI_SKELLAM,
}


@dataclass(frozen=True)
class ModelSpec:
    """Names one model family (distribution + dynamics)."""

    family: str

    def __post_init__(self):
        if self.family not in _PARAM_NAMES:
            raise DomainError(f"unknown model family {self.family!r}; "
                              f"expected one of {sorted(_PARAM_NAMES)}")

    @property
    def param_names(self):
        return _PARAM_NAMES[self.family]

    @property
    def is_interval_family(self):
        return self.family in _DIST_KIND

    @property
    def dist_kind(self):
        return _DIST_KIND[self.family]

    @classmethod
    def from_cli_name(cls, name):
        key = name.strip().lower()
        if key not in _CLI_NAMES:
            raise DomainError(f"unknown model name {name!r}; "
                              f"expected one of {sorted(_CLI_NAMES)}")
        return cls(_CLI_NAMES[key])

    @property
    def cli_name(self):
        for cli, fam in _CLI_NAMES.items():
            if fam == self.family:
                return cli
        raise AssertionError(self.family)


@dataclass(frozen=True)
class ParamVector:
    """Ordered named parameter point for one ModelSpec."""

    names: tuple
    values: tuple

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise DomainError("names and values must have equal length")
        for name, v in zip(self.names, self.values):
            if not math.isfinite(v):
                raise DomainError(f"parameter {name} must be finite, got {v!r}")

    @classmethod
    def from_dict(cls, spec, mapping):
        names = spec.param_names
        missing = [n for n in names if n not in mapping]
        if missing:
            raise DomainError(f"missing parameters {missing} for {spec.family}")
        return cls(names=tuple(names), values=tuple(float(mapping[n]) for n in names))

    def as_dict(self):
        return dict(zip(self.names, self.values))

    def to_array(self):
        return np.asarray(self.values, dtype=float)

    def __getitem__(self, name):
        try:
            return self.values[self.names.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def get(self, name, default=None):
        return self[name] if name in self.names else default


@dataclass(frozen=True)
class GarchParams:
    """y_t = mu + e_t; sigma2_t = omega + alpha e_{t-1}^2 + phi sigma2_{t-1}."""

    mu: float
    omega: float
    alpha: float
    phi: float
    nu: float

    def __post_init__(self):
        for name in ("mu", "omega", "alpha", "phi", "nu"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.omega <= 0.0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if self.alpha < 0.0 or self.phi < 0.0:
            raise DomainError("alpha and phi must be nonnegative")
        if self.alpha + self.phi >= 1.0:
            raise DomainError(
                f"alpha + phi must be < 1, got {self.alpha + self.phi}")
        if self.nu <= 0.0:
            raise DomainError(f"nu must be positive, got {self.nu}")


@dataclass(frozen=True)
class GasContParams:
    """ln sigma2_t = omega + alpha * score_{t-1} + phi * ln sigma2_{t-1}."""

    mu: float
    omega: float
    alpha: float
    phi: float
    nu: float

    def __post_init__(self):
        for name in ("mu", "omega", "alpha", "phi", "nu"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if abs(self.phi) >= 1.0:
            raise DomainError(f"|phi| must be < 1, got {self.phi}")
        if self.nu <= 0.0:
            raise DomainError(f"nu must be positive, got {self.nu}")


@dataclass(frozen=True)
class IntervalModelParams:
    """MA(1) location plus score-driven log-variance component.

    mu_t = theta (y_{t-1} - mu_{t-1});  ln sigma2_t = omega + ln s_t + e_t;
    e_t = alpha * score_{t-1} + phi * e_{t-1}. The shape block is nu for the
    t kernel and pi for the zero-inflated Skellam; both None otherwise.
    """

    theta: float
    omega: float
    alpha: float
    phi: float
    nu: float | None = None
    pi: float | None = None

    def __post_init__(self):
        for name in ("theta", "omega", "alpha", "phi"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if abs(self.theta) >= 1.0:
            raise DomainError(f"|theta| must be < 1, got {self.theta}")
        if abs(self.phi) >= 1.0:
            raise DomainError(f"|phi| must be < 1, got {self.phi}")
        if self.nu is not None and (not math.isfinite(self.nu) or self.nu <= 0.0):
            raise DomainError(f"nu must be positive, got {self.nu}")
        if self.pi is not None and not 0.0 <= self.pi < 1.0:
            raise DomainError(f"pi must be in [0, 1), got {self.pi}")


@dataclass
class FilterOutput:
    """Per-observation paths produced by one filter run.

    e_path holds the filter's dynamic component: the residual y_t - mu for
    garch_t, ln sigma2_t for gas_t, and the score-driven component e_t of the
    interval families. loglik_terms may contain -inf entries, counted in
    underflow_count. final_state carries the post-sample recursion state so a
    split series can be filtered in parts.
    """

    mu_path: np.ndarray
    sigma2_path: np.ndarray
    e_path: np.ndarray
    score_path: np.ndarray
    loglik_terms: np.ndarray
    underflow_count: int = 0
    sigma2_floor_count: int = 0
    final_state: tuple = ()

    @property
    def n_obs(self):
        return len(self.loglik_terms)

    @property
    def loglik_total(self):
        if self.underflow_count > 0:
            return -math.inf
        return float(np.sum(self.loglik_terms))

    @property
    def loglik_avg(self):
        return self.loglik_total / self.n_obs


def _as_float_array(y):
    arr = np.asarray(getattr(y, "changes", y), dtype=float)
    if arr.ndim != 1:
        raise DomainError("series must be one-dimensional")
    if arr.size < 1:
        raise DomainError("series must contain at least one observation")
    if not np.all(np.isfinite(arr)):
        raise DomainError("series contains non-finite values")
    return arr


def resolve_lnshat(s_hat, y, n):
    """ln of the diurnal profile aligned with the series (zeros when absent)."""
    if s_hat is None:
        return np.zeros(n)
    if hasattr(s_hat, "eval"):
        times = getattr(y, "time_of_day", None)
        if times is None:
            raise DomainError("a diurnal profile needs a series with time-of-day stamps")
        vals = np.asarray(s_hat.eval(np.asarray(times, dtype=float)), dtype=float)
    else:
        vals = np.asarray(s_hat, dtype=float)
    if vals.shape != (n,):
        raise DomainError(f"diurnal values must have length {n}, got {vals.shape}")
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
        raise DomainError("diurnal values must be finite and positive")
    return np.log(vals)


def filter_garch(y, p, state0=None):
    """Run the GARCH(1,1) recursion; sigma2_1 defaults to the unconditional
    variance omega / (1 - alpha - phi)."""
    arr = _as_float_array(y)
    if state0 is None:
        sigma2_init = p.omega / (1.0 - p.alpha - p.phi)
    else:
        (sigma2_init,) = state0
    sigma2_path, e_path, terms, reason, idx, sigma2_final = _k.filter_garch_k(
        arr, p.mu, p.omega, p.alpha, p.phi, p.nu, sigma2_init)
    if reason == _k.ABORT_DIVERGED:
        raise FilterDivergedError(f"GARCH variance diverged at t={idx}", index=idx)
    return FilterOutput(
        mu_path=np.full(arr.size, p.mu),
        sigma2_path=sigma2_path,
        e_path=e_path,
        score_path=np.zeros(arr.size),
        loglik_terms=terms,
        final_state=(float(sigma2_final),),
    )


def filter_gas_continuous(y, p, state0=None, literal_level_recursion=False):
    """Run the score-driven recursion; ln sigma2_1 defaults to omega / (1 - phi).

    literal_level_recursion feeds back phi * sigma2_{t-1} instead of
    phi * ln sigma2_{t-1} (comparison mode only).
    """
    arr = _as_float_array(y)
    if state0 is None:
        ls_init = p.omega / (1.0 - p.phi)
    else:
        (ls_init,) = state0
    sigma2_path, score_path, terms, reason, idx, ls_final = _k.filter_gas_k(
        arr, p.mu, p.omega, p.alpha, p.phi, p.nu,
        bool(literal_level_recursion), ls_init)
    if reason == _k.ABORT_DIVERGED:
        raise FilterDivergedError(f"log-variance diverged at t={idx}", index=idx)
    return FilterOutput(
        mu_path=np.full(arr.size, p.mu),
        sigma2_path=sigma2_path,
        e_path=np.log(sigma2_path),
        score_path=score_path,
        loglik_terms=terms,
        final_state=(float(ls_final),),
    )


def filter_interval(y, p, s_hat=None, dist_kind="t", state0=None):
    """Run the MA(1)-location interval filter for one of the four families.

    state0 is (mu_1, e_1); both default to their long-run value 0.
    """
    if dist_kind not in _DIST_CODES:
        raise DomainError(f"unknown dist_kind {dist_kind!r}")
    arr = _as_float_array(y)
    lnshat = resolve_lnshat(s_hat, y, arr.size)
    if dist_kind in ("skellam", "zi_skellam"):
        if not np.all(arr == np.round(arr)):
            raise DomainError("Skellam families need integer-valued observations")
    nu = float(p.nu) if p.nu is not None else 0.0
    pi = float(p.pi) if p.pi is not None else 0.0
    if dist_kind == "t" and p.nu is None:
        raise DomainError("the t kernel needs nu")
    if dist_kind == "zi_skellam" and p.pi is None:
        raise DomainError("the zero-inflated Skellam needs pi")
    mu0, e0 = (0.0, 0.0) if state0 is None else (float(state0[0]), float(state0[1]))
    (mu_path, sigma2_path, e_path, score_path, terms, underflow, floored,
     reason, idx, mu_fin, e_fin) = _k.filter_interval_k(
        arr, lnshat, p.theta, p.omega, p.alpha, p.phi, nu, pi,
        _DIST_CODES[dist_kind], mu0, e0)
    if reason == _k.ABORT_DIVERGED:
        raise FilterDivergedError(f"variance recursion diverged at t={idx}", index=idx)
    if reason == _k.ABORT_SCORE_UNDEFINED:
        raise ScoreUndefinedError(f"score undefined at t={idx}", index=idx)
    return FilterOutput(
        mu_path=mu_path,
        sigma2_path=sigma2_path,
        e_path=e_path,
        score_path=score_path,
        loglik_terms=terms,
        underflow_count=int(underflow),
        sigma2_floor_count=int(floored),
        final_state=(float(mu_fin), float(e_fin)),
    )


def _interval_params_from_vector(spec, p):
    d = p.as_dict()
    return IntervalModelParams(
        theta=d["theta"], omega=d["omega"], alpha=d["alpha"], phi=d["phi"],
        nu=d.get("nu"), pi=d.get("pi"))


def _static_t_output(arr, sigma2, nu):
    terms = np.array([_k.t_logpdf_scaled(v, sigma2, nu) for v in arr])
    scores = np.array([_k.t_density_score(v, sigma2, nu) for v in arr])
    return FilterOutput(
        mu_path=np.zeros(arr.size),
        sigma2_path=np.full(arr.size, sigma2),
        e_path=arr.copy(),
        score_path=scores,
        loglik_terms=terms,
        final_state=(),
    )


def filter_model(y, spec, p, s_hat=None, state0=None):
    """Dispatch a ParamVector to the family's filter."""
    if tuple(p.names) != tuple(spec.param_names):
        raise DomainError(
            f"parameter names {p.names} do not match {spec.family} "
            f"({spec.param_names})")
    d = p.as_dict()
    if spec.family == "garch_t":
        return filter_garch(y, GarchParams(**d), state0=state0)
    if spec.family == "gas_t":
        return filter_gas_continuous(y, GasContParams(**d), state0=state0)
    if spec.family == "static_t":
        arr = _as_float_array(y)
        sigma2 = max(d["sigma2"], _k.SIGMA2_FLOOR)
        if d["nu"] <= 0.0:
            raise DomainError("nu must be positive")
        return _static_t_output(arr, sigma2, d["nu"])
    return filter_interval(y, _interval_params_from_vector(spec, p),
                           s_hat=s_hat, dist_kind=spec.dist_kind, state0=state0)


def loglik(y, spec, p, s_hat=None):
    """Total log-likelihood; -inf when any interval probability underflows
    (the in-sample objective contract)."""
    if spec.family == "static_t":
        if tuple(p.names) != tuple(spec.param_names):
            raise DomainError(
                f"parameter names {p.names} do not match {spec.family}")
        arr = _as_float_array(y)
        d = p.as_dict()
        sigma2 = max(d["sigma2"], _k.SIGMA2_FLOOR)
        if d["nu"] <= 0.0:
            raise DomainError("nu must be positive")
        return float(_k.static_t_density_loglik(arr, sigma2, d["nu"]))
    return filter_model(y, spec, p, s_hat=s_hat).loglik_total


def loglik_mean(y, spec, p, s_hat=None):
    """Per-observation average log-likelihood (the ell of summary tables)."""
    arr = _as_float_array(y)
    return loglik(y, spec, p, s_hat=s_hat) / arr.size
