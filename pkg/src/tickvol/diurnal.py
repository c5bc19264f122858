"""Intraday seasonality profile from smoothed squared price changes.

The profile is estimated by binning squared changes over time-of-day,
fitting a cubic smoothing spline (roughness penalty chosen by generalized
cross-validation) to the bin means, flooring, and normalizing so the profile
averages 1 over the session. ln s_hat is therefore always finite and omega
carries the variance level.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, make_smoothing_spline

from .errors import DomainError
from .pipeline import SESSION_SECONDS

__all__ = ["DiurnalProfile", "estimate_profile", "eval_profile"]

DEFAULT_BIN_WIDTH = 300.0
PROFILE_FLOOR = 1e-6
_EVAL_GRID_STEP = 1.0  # normalization grid, seconds
_MIN_NONEMPTY_BINS = 8


@dataclass
class DiurnalProfile:
    """Knot grid (seconds since open) and smoothed, normalized values."""

    knots: np.ndarray
    values: np.ndarray
    floor: float = PROFILE_FLOOR
    _spline: CubicSpline = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if knots.ndim != 1 or knots.shape != values.shape or knots.size < 4:
            raise DomainError("profile needs >= 4 aligned knots and values")
        if np.any(np.diff(knots) <= 0.0):
            raise DomainError("knots must be strictly increasing")
        if knots[0] > 0.0 or knots[-1] < SESSION_SECONDS:
            raise DomainError("knots must cover the full session")
        if self.floor <= 0.0 or np.any(values < self.floor):
            raise DomainError("values must be >= floor > 0")
        self.knots = knots
        self.values = values
        self._spline = CubicSpline(knots, values, bc_type="natural")

    def eval(self, time_of_day):
        """Natural cubic spline interpolation, clipped at the floor."""
        t = np.asarray(time_of_day, dtype=float)
        if np.any(t < 0.0) or np.any(t > SESSION_SECONDS):
            raise DomainError("time of day outside the trading session")
        out = np.maximum(self._spline(t), self.floor)
        return float(out) if np.ndim(time_of_day) == 0 else out

    def to_json(self):
        return json.dumps({
            "knots": self.knots.tolist(),
            "values": self.values.tolist(),
            "floor": self.floor,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls(knots=np.asarray(doc["knots"], dtype=float),
                   values=np.asarray(doc["values"], dtype=float),
                   floor=float(doc["floor"]))


def _gather(data):
    series = [data] if hasattr(data, "changes") else list(data)
    if not series:
        raise DomainError("no data supplied")
    tod = np.concatenate([np.asarray(s.time_of_day, dtype=float) for s in series])
    sq = np.concatenate([np.asarray(s.changes, dtype=float) ** 2 for s in series])
    return tod, sq


def estimate_profile(data, bin_width=DEFAULT_BIN_WIDTH, floor=PROFILE_FLOOR):
    """Estimate the profile from one ChangeSeries or a pooled collection.

    The spline is fitted to level-normalized bin means, so scaling every
    change by a constant leaves the result invariant.
    """
    if bin_width <= 0.0:
        raise DomainError("bin_width must be positive")
    tod, sq = _gather(data)
    n_bins = max(int(math.ceil(SESSION_SECONDS / bin_width)), 4)
    edges = np.linspace(0.0, SESSION_SECONDS, n_bins + 1)
    idx = np.clip(np.searchsorted(edges, tod, side="right") - 1, 0, n_bins - 1)
    sums = np.bincount(idx, weights=sq, minlength=n_bins)
    counts = np.bincount(idx, minlength=n_bins)

    nonempty = counts > 0
    if nonempty.sum() < _MIN_NONEMPTY_BINS:
        raise DomainError(
            f"need at least {_MIN_NONEMPTY_BINS} nonempty bins for a session profile "
            f"(got {int(nonempty.sum())})")
    span = tod.max() - tod.min()
    if span < 0.5 * SESSION_SECONDS:
        raise DomainError("data does not cover a full session")

    means = np.zeros(n_bins)
    means[nonempty] = sums[nonempty] / counts[nonempty]
    # fill empty bins (session edges included) from the nearest nonempty bin
    if not nonempty.all():
        good = np.flatnonzero(nonempty)
        for i in np.flatnonzero(~nonempty):
            means[i] = means[good[np.argmin(np.abs(good - i))]]

    level = means.mean()
    if level <= 0.0:
        means = np.ones(n_bins)
        level = 1.0
    rel = means / level

    centers = 0.5 * (edges[:-1] + edges[1:])
    spline = make_smoothing_spline(centers, rel)  # lam chosen by GCV
    smooth = np.maximum(spline(centers), floor)

    knots = np.concatenate(([0.0], centers, [SESSION_SECONDS]))
    values = np.concatenate(([smooth[0]], smooth, [smooth[-1]]))

    grid = np.arange(0.0, SESSION_SECONDS + 0.5 * _EVAL_GRID_STEP, _EVAL_GRID_STEP)
    mean_val = CubicSpline(knots, values, bc_type="natural")(grid).mean()
    values = np.maximum(values / mean_val, floor)
    return DiurnalProfile(knots=knots, values=values, floor=floor)


def eval_profile(profile, time_of_day):
    """Module-level alias for DiurnalProfile.eval."""
    return profile.eval(time_of_day)
