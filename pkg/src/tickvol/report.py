"""Figure data and rendering for the report path.

Each figure is emitted twice: a plot-data CSV (the stable, scriptable
contract) and a rendered PNG next to it. Rendering is deterministic given
identical inputs (fixed style, pinned PNG metadata).
"""

from __future__ import annotations

import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from . import _kernels as _k
from .diagnose import fitted_vs_observed

__all__ = [
    "histogram_frame",
    "density_overlay_frame",
    "scan_frame",
    "fit_difference_frame",
    "render_hist_density",
    "render_scan",
    "render_fit_difference",
    "PNG_METADATA",
]

PNG_METADATA = {"Software": "tickvol"}
DENSITY_GRID_STEP = 0.01
DEFAULT_OVERLAY_NUS = (0.2, 1.0, 5.0, 30.0)


def histogram_frame(series_list):
    """Pooled integer histogram of price changes (share per value)."""
    arr = np.concatenate([np.asarray(s.changes, dtype=np.int64) for s in series_list])
    values, counts = np.unique(arr, return_counts=True)
    return pd.DataFrame({"k": values, "share": counts / arr.size})


def density_overlay_frame(series_list, scan, nus=DEFAULT_OVERLAY_NUS):
    """Static-t densities on a 0.01-cent grid over the histogram support,
    one column per degrees-of-freedom value, scales taken from the scan."""
    arr = np.concatenate([np.asarray(s.changes, dtype=np.int64) for s in series_list])
    lo, hi = float(arr.min()) - 0.5, float(arr.max()) + 0.5
    x = np.arange(lo, hi + DENSITY_GRID_STEP / 2, DENSITY_GRID_STEP)
    frame = pd.DataFrame({"x": x})
    for nu in nus:
        i = int(np.argmin(np.abs(scan.nu_grid - nu)))
        nu_used = float(scan.nu_grid[i])
        sigma2 = float(scan.sigma2_hat[i])
        sigma = math.sqrt(sigma2)
        dens = np.array([_k.t_pdf_k(v / sigma, nu_used) / sigma for v in x])
        frame[f"density_nu_{nu_used:g}"] = dens
    return frame


def scan_frame(scans):
    """Long-form (nu, kind) rows for one or more NuScanResult objects."""
    rows = []
    for scan in scans:
        for i in range(scan.nu_grid.size):
            rows.append({
                "nu": float(scan.nu_grid[i]),
                "kind": scan.kind,
                "sigma2_hat": float(scan.sigma2_hat[i]),
                "loglik_avg": float(scan.loglik_avg[i]),
                "floored": bool(scan.floored[i]),
            })
    return pd.DataFrame(rows, columns=["nu", "kind", "sigma2_hat",
                                       "loglik_avg", "floored"])


def fit_difference_frame(fits_by_model, days, profiles=None, support=None):
    """Average (over days) observed-minus-fitted probability per integer,
    one column per model."""
    pooled = np.concatenate([np.asarray(d.changes, dtype=np.int64) for d in days])
    if support is None:
        support = np.arange(pooled.min(), pooled.max() + 1)
    if profiles is None or hasattr(profiles, "eval"):
        profiles = [profiles] * len(days)
    frame = pd.DataFrame({"k": support})
    for model, fits in fits_by_model.items():
        acc = np.zeros(len(support))
        used = 0
        for fit, day, prof in zip(fits, days, profiles):
            if not fit.converged:
                continue
            _, diffs = fitted_vs_observed(fit, day, support=support, s_hat=prof)
            acc += diffs
            used += 1
        frame[model] = acc / used if used else np.nan
    return frame


def _save(fig, path):
    fig.savefig(path, dpi=150, metadata=PNG_METADATA)
    plt.close(fig)


def render_hist_density(hist, dens, path):
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.bar(hist["k"], hist["share"], width=0.9, color="0.75",
           edgecolor="0.4", label="observed share")
    if dens is not None:
        for col in [c for c in dens.columns if c != "x"]:
            ax.plot(dens["x"], dens[col], lw=1.2,
                    label=col.replace("density_nu_", "t, df="))
    ax.set_xlabel("price change (cents)")
    ax.set_ylabel("probability / density")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_scan(frame, path):
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for kind, grp in frame.groupby("kind"):
        ax.plot(grp["nu"], grp["loglik_avg"], marker="o", ms=3, lw=1.0, label=kind)
        fl = grp[grp["floored"]]
        if len(fl):
            ax.plot(fl["nu"], fl["loglik_avg"], ls="none", marker="x", ms=6,
                    color="k", label=f"{kind} (scale at floor)")
    ax.set_xscale("log")
    ax.set_xlabel("degrees of freedom")
    ax.set_ylabel("average log-likelihood")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_fit_difference(frame, path):
    models = [c for c in frame.columns if c != "k"]
    fig, axes = plt.subplots(len(models), 1, figsize=(8, 2.2 * len(models)),
                             squeeze=False, sharex=True)
    for ax, model in zip(axes[:, 0], models):
        ax.bar(frame["k"], frame[model], width=0.8, color="0.6")
        ax.axhline(0.0, color="k", lw=0.6)
        ax.set_ylabel(model, fontsize=8)
    axes[-1, 0].set_xlabel("price change (cents)")
    fig.tight_layout()
    _save(fig, path)
