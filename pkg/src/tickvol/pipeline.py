"""Tick data ingestion, cleaning and last-tick aggregation.

Prices are integer cents end to end, so aggregated price changes are exact
integers. The trading session is 09:30:00-16:00:00 exchange time; time-of-day
stamps are seconds since the open.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from numba import njit

from .errors import DomainError, IngestError

__all__ = [
    "SESSION_SECONDS",
    "TickSeries",
    "ChangeSeries",
    "CleaningReport",
    "ChangeSummary",
    "ingest_csv",
    "clean",
    "aggregate_last_tick",
    "summarize_changes",
    "write_changes_csv",
    "read_changes_csv",
]

log = logging.getLogger(__name__)

SESSION_SECONDS = 23400.0  # 09:30:00 to 16:00:00
_OPEN_SECONDS = 9 * 3600 + 30 * 60
DEFAULT_TZ = "America/New_York"

_OUTLIER_HALF_WINDOW = 100  # 201-tick centered window, point under test excluded
_OUTLIER_MULT = 10.0


@dataclass(frozen=True)
class TickSeries:
    """Raw timestamped trades for one instrument.

    timestamps_ms are epoch milliseconds (UTC); day and time_of_day are
    derived in the exchange timezone.
    """

    timestamps_ms: np.ndarray
    prices: np.ndarray
    tz: str = DEFAULT_TZ
    day: np.ndarray = field(default=None)
    time_of_day: np.ndarray = field(default=None)

    def __post_init__(self):
        ts = np.asarray(self.timestamps_ms, dtype=np.int64)
        px = np.asarray(self.prices, dtype=np.int64)
        if ts.shape != px.shape or ts.ndim != 1:
            raise DomainError("timestamps and prices must be 1-D and aligned")
        if ts.size > 1 and np.any(np.diff(ts) < 0):
            raise DomainError("timestamps must be nondecreasing")
        object.__setattr__(self, "timestamps_ms", ts)
        object.__setattr__(self, "prices", px)
        if self.day is None or self.time_of_day is None:
            day, tod = _derive_day_tod(ts, self.tz)
            object.__setattr__(self, "day", day)
            object.__setattr__(self, "time_of_day", tod)

    @property
    def n(self):
        return self.timestamps_ms.size

    def take(self, mask_or_index):
        return TickSeries(
            timestamps_ms=self.timestamps_ms[mask_or_index],
            prices=self.prices[mask_or_index],
            tz=self.tz,
            day=self.day[mask_or_index],
            time_of_day=self.time_of_day[mask_or_index],
        )


@dataclass(frozen=True)
class ChangeSeries:
    """Integer price changes for one day at a fixed sampling frequency."""

    changes: np.ndarray
    time_of_day: np.ndarray
    day: str
    frequency: float

    def __post_init__(self):
        ch = np.asarray(self.changes, dtype=np.int64)
        tod = np.asarray(self.time_of_day, dtype=float)
        if ch.shape != tod.shape or ch.ndim != 1:
            raise DomainError("changes and time_of_day must be 1-D and aligned")
        if tod.size > 1 and np.any(np.diff(tod) <= 0.0):
            raise DomainError("time_of_day must be strictly increasing")
        if self.frequency <= 0.0:
            raise DomainError(f"frequency must be positive, got {self.frequency}")
        object.__setattr__(self, "changes", ch)
        object.__setattr__(self, "time_of_day", tod)

    @property
    def n(self):
        return self.changes.size


@dataclass
class CleaningReport:
    """Counts of ticks removed by each cleaning rule."""

    dropped_out_of_hours: int = 0
    dropped_bad_price: int = 0
    dropped_outlier: int = 0
    outlier_rounds: int = 0
    kept: int = 0
    warnings: list = field(default_factory=list)

    def to_json(self):
        return json.dumps({
            "dropped_out_of_hours": self.dropped_out_of_hours,
            "dropped_bad_price": self.dropped_bad_price,
            "dropped_outlier": self.dropped_outlier,
            "outlier_rounds": self.outlier_rounds,
            "kept": self.kept,
            "warnings": list(self.warnings),
        }, sort_keys=True, indent=2)


@dataclass(frozen=True)
class ChangeSummary:
    """Integer histogram plus the headline shares."""

    n: int
    zero_share: float
    within_10_share: float
    histogram: dict


def _derive_day_tod(ts_ms, tz):
    if ts_ms.size == 0:
        return np.array([], dtype=object), np.array([], dtype=float)
    idx = pd.to_datetime(ts_ms, unit="ms", utc=True).tz_convert(tz)
    day = np.asarray(idx.strftime("%Y-%m-%d"), dtype=object)
    seconds = (idx.hour * 3600 + idx.minute * 60 + idx.second).to_numpy(dtype=float)
    seconds = seconds + idx.microsecond.to_numpy(dtype=float) / 1e6
    tod = seconds - _OPEN_SECONDS
    return day, tod


def _dollars_to_cents(values):
    scaled = np.abs(values) * 100.0
    cents = np.floor(scaled + 0.5 + 1e-9)  # round half away from zero
    return (np.sign(values) * cents).astype(np.int64)


def ingest_csv(path, schema=None, price_unit="dollars"):
    """Read a tick CSV into a TickSeries.

    schema maps roles to column names ({"timestamp": ..., "price": ...},
    default column names "timestamp" and "price"); gzip files are handled by
    extension. Timestamps may be epoch milliseconds, ISO date-times
    (interpreted as exchange wall-clock time), or bare times HH:MM:SS[.fff]
    (assigned to 1970-01-01). Returns (ticks, skipped_rows): rows whose
    timestamp or price fail to parse are counted and skipped.
    """
    schema = dict(schema or {})
    ts_col = schema.get("timestamp", "timestamp")
    px_col = schema.get("price", "price")
    unit = schema.get("unit", price_unit)
    if unit not in ("dollars", "cents"):
        raise DomainError(f"price_unit must be 'dollars' or 'cents', got {unit!r}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise IngestError(f"{path}: file is empty", line_no=1) from None
    except (pd.errors.ParserError, UnicodeDecodeError, OSError) as exc:
        raise IngestError(f"{path}: cannot parse file ({exc})", line_no=1) from exc
    for col in (ts_col, px_col):
        if col not in frame.columns:
            raise IngestError(
                f"{path}: missing column {col!r} (have {list(frame.columns)})",
                line_no=1)
    if len(frame) == 0:
        raise IngestError(f"{path}: no data rows", line_no=2)

    raw_ts = frame[ts_col].str.strip()
    raw_px = frame[px_col].str.strip()

    first = raw_ts[raw_ts != ""]
    sample = first.iloc[0] if len(first) else ""
    if sample.isdigit():
        ts_num = pd.to_numeric(raw_ts, errors="coerce")
        ts_ok = ts_num.notna()
        ts_ms = ts_num.fillna(0).astype(np.int64)
        dt = None
    else:
        text = raw_ts.copy()
        bare_time = text.str.match(r"^\d{1,2}:\d{2}:\d{2}(\.\d+)?$", na=False)
        text = text.where(~bare_time, "1970-01-01 " + text)
        dt = pd.to_datetime(text, errors="coerce", format="mixed")
        ts_ok = dt.notna()
        ts_ms = None

    px_num = pd.to_numeric(raw_px, errors="coerce")
    px_ok = px_num.notna() & (raw_px != "")

    ok = (ts_ok & px_ok).to_numpy()
    skipped = int((~ok).sum())
    if not ok.any():
        first_bad = int(np.argmax(~ok)) + 2  # header is line 1
        raise IngestError(f"{path}: no parseable rows", line_no=first_bad)

    px_vals = px_num.to_numpy()[ok]
    if unit == "dollars":
        prices = _dollars_to_cents(px_vals)
    else:
        prices = np.round(px_vals).astype(np.int64)

    if ts_ms is not None:
        stamps = ts_ms.to_numpy()[ok]
    else:
        local = dt[ok].dt.tz_localize(DEFAULT_TZ)
        stamps = (local.dt.tz_convert("UTC").astype(np.int64) // 1_000_000).to_numpy()

    order = np.argsort(stamps, kind="stable")
    ticks = TickSeries(timestamps_ms=stamps[order], prices=prices[order])
    return ticks, skipped


@njit(cache=True, nogil=True, error_model="numpy")
def _outlier_mask(prices, half, mult):
    """True where |p - neighbor mean| > mult * mean |p_j - neighbor mean|,
    neighbors being the centered window excluding the point itself."""
    n = prices.shape[0]
    drop = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        lo = i - half
        if lo < 0:
            lo = 0
        hi = i + half + 1
        if hi > n:
            hi = n
        cnt = hi - lo - 1
        if cnt < 2:
            continue  # dispersion from a single neighbor is degenerate
        s = 0.0
        for j in range(lo, hi):
            if j != i:
                s += prices[j]
        m = s / cnt
        mad = 0.0
        for j in range(lo, hi):
            if j != i:
                mad += abs(prices[j] - m)
        mad /= cnt
        if abs(prices[i] - m) > mult * mad:
            drop[i] = True
    return drop


def clean(ticks):
    """Apply the session-hours, bad-price and rolling-outlier rules.

    The outlier rule is iterated to a fixed point within each day so that
    cleaning is exactly idempotent. Days shorter than the 201-tick window are
    handled with a full-day window and a warning.
    """
    if ticks.n == 0:
        raise DomainError("cannot clean an empty tick series")
    report = CleaningReport()

    in_hours = (ticks.time_of_day >= 0.0) & (ticks.time_of_day <= SESSION_SECONDS)
    report.dropped_out_of_hours = int((~in_hours).sum())
    ticks = ticks.take(in_hours)

    good_price = ticks.prices > 0
    report.dropped_bad_price = int((~good_price).sum())
    ticks = ticks.take(good_price)

    keep = np.ones(ticks.n, dtype=bool)
    max_rounds = 0
    for day in pd.unique(ticks.day):
        day_idx = np.flatnonzero(ticks.day == day)
        if day_idx.size < 2 * _OUTLIER_HALF_WINDOW + 1:
            report.warnings.append(
                f"{day}: only {day_idx.size} ticks, outlier window spans the full day")
        alive = day_idx.copy()
        rounds = 0
        while alive.size > 1:
            prices = ticks.prices[alive].astype(np.float64)
            half = _OUTLIER_HALF_WINDOW if alive.size >= 2 * _OUTLIER_HALF_WINDOW + 1 else alive.size
            drop = _outlier_mask(prices, half, _OUTLIER_MULT)
            rounds += 1
            if not drop.any():
                break
            report.dropped_outlier += int(drop.sum())
            keep[alive[drop]] = False
            alive = alive[~drop]
        max_rounds = max(max_rounds, rounds)
    report.outlier_rounds = max_rounds

    cleaned = ticks.take(keep)
    report.kept = cleaned.n
    return cleaned, report


def aggregate_last_tick(ticks, frequency):
    """Sample each day on the grid open + k * frequency (k >= 1) with the last
    trade at or before each grid time, then difference the grid prices.

    Grid points before a day's first trade are dropped. Days with fewer than
    two surviving grid points are skipped with a warning. Returns one
    ChangeSeries per day, in day order.
    """
    if frequency <= 0.0:
        raise DomainError(f"frequency must be positive, got {frequency}")
    freq_ms = int(round(frequency * 1000.0))
    if freq_ms < 1:
        raise DomainError(f"frequency {frequency} is below 1 ms resolution")
    n_grid = int(SESSION_SECONDS * 1000.0) // freq_ms
    grid_ms = (np.arange(1, n_grid + 1, dtype=np.int64)) * freq_ms

    out = []
    for day in sorted(set(ticks.day.tolist())):
        sel = ticks.day == day
        tod_ms = np.round(ticks.time_of_day[sel] * 1000.0).astype(np.int64)
        prices = ticks.prices[sel]
        pos = np.searchsorted(tod_ms, grid_ms, side="right") - 1
        alive = pos >= 0
        if alive.sum() < 2:
            log.warning("%s: fewer than 2 grid points survive at frequency %gs; day skipped",
                        day, frequency)
            continue
        grid_prices = prices[pos[alive]]
        grid_tod = grid_ms[alive].astype(float) / 1000.0
        out.append(ChangeSeries(
            changes=np.diff(grid_prices),
            time_of_day=grid_tod[1:],
            day=str(day),
            frequency=float(frequency),
        ))
    return out


def summarize_changes(series):
    """Integer histogram plus the zero and within-[-10, 10] shares."""
    arr = np.asarray(getattr(series, "changes", series), dtype=np.int64)
    if arr.size == 0:
        raise DomainError("cannot summarize an empty change series")
    values, counts = np.unique(arr, return_counts=True)
    hist = {int(v): float(c) / arr.size for v, c in zip(values, counts)}
    return ChangeSummary(
        n=int(arr.size),
        zero_share=float(np.mean(arr == 0)),
        within_10_share=float(np.mean(np.abs(arr) <= 10)),
        histogram=hist,
    )


def write_changes_csv(series, path):
    """Write one or more ChangeSeries as `day,time_of_day_s,change_cents`."""
    if isinstance(series, ChangeSeries):
        series = [series]
    frames = [pd.DataFrame({
        "day": s.day,
        "time_of_day_s": s.time_of_day,
        "change_cents": s.changes,
    }) for s in series]
    pd.concat(frames, ignore_index=True).to_csv(path, index=False)


def read_changes_csv(path):
    """Read `day,time_of_day_s,change_cents` into ChangeSeries per day.

    The sampling frequency is inferred from the median stamp spacing.
    """
    try:
        frame = pd.read_csv(path)
    except (pd.errors.EmptyDataError, pd.errors.ParserError, OSError) as exc:
        raise IngestError(f"{path}: cannot parse change file ({exc})", line_no=1) from exc
    for col in ("day", "time_of_day_s", "change_cents"):
        if col not in frame.columns:
            raise IngestError(f"{path}: missing column {col!r}", line_no=1)
    out = []
    for day, grp in frame.groupby("day", sort=True):
        tod = grp["time_of_day_s"].to_numpy(dtype=float)
        changes = grp["change_cents"].to_numpy()
        if not np.all(changes == np.round(changes)):
            raise IngestError(f"{path}: non-integer change for day {day}")
        if tod.size > 1:
            freq = float(np.median(np.diff(tod)))
        else:
            freq = float(tod[0]) if tod[0] > 0 else 1.0
        out.append(ChangeSeries(
            changes=changes.astype(np.int64),
            time_of_day=tod,
            day=str(day),
            frequency=freq,
        ))
    return out
