"""Batch command-line interface.

Subcommands wire the library into the full workflow: clean and aggregate
tick data, scan degrees of freedom, fit daily models, evaluate next-day
performance, simulate synthetic data, and build report figures.

Exit codes: 0 success, 1 finished with model/convergence warnings, 2 input
error. Every command is deterministic given (inputs, config, seed); output
files are written atomically (temp file + rename) and re-runs overwrite
byte-identically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd

from . import diagnose, diurnal, estimate, pipeline, report
from .dynamics import ModelSpec, ParamVector
from .errors import DomainError, IngestError, TickvolError
from .sim import SimSpec, simulate

THREADS_ENV = "TICKVOL_THREADS"
SENTINEL = "x"  # unavailable statistic in summary tables

# rows always present in the summary table ("x" marks an inapplicable or
# unavailable statistic); mu/sigma2 appear only when a requested model has them
CORE_SUMMARY_ROWS = ("theta", "omega", "alpha", "phi", "nu", "pi", "A", "loglik")
EXTRA_SUMMARY_ROWS = ("mu", "sigma2")


# ---------------------------------------------------------------------------
# small filesystem helpers
# ---------------------------------------------------------------------------

def _write_text_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_frame_atomic(frame, path):
    _write_text_atomic(path, frame.to_csv(index=False))


def _write_bytes_atomic(path, render):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.stem}.tmp{path.suffix}")
    try:
        render(tmp)
        os.replace(tmp, path)
    except BaseException:
        if tmp.exists():
            tmp.unlink()
        raise


def _parse_schema(text):
    if not text:
        return {}
    out = {}
    for item in text.split(","):
        if "=" not in item:
            raise DomainError(f"bad schema entry {item!r}; expected role=column")
        key, val = item.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def _parse_nu_grid(text):
    if not text:
        return None
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise DomainError(f"bad nu grid {text!r}; expected lo:hi:count or a comma list")
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        return diagnose.default_nu_grid(count, lo, hi)
    return np.asarray([float(v) for v in text.split(",")], dtype=float)


def _load_config(path):
    if not path:
        return {}
    out = {}
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{line_no}: expected key=value")
        key, val = line.split("=", 1)
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def _echo_config(args, out_dir):
    doc = {k: v for k, v in sorted(vars(args).items())
           if k not in ("func",) and v is not None}
    doc = {k: (str(v) if isinstance(v, Path) else v) for k, v in doc.items()}
    _write_text_atomic(Path(out_dir) / "run_config.json",
                       json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _read_changes_input(path):
    """A change CSV file, or a directory of them, as a day-sorted list."""
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.csv"))
        if not files:
            raise IngestError(f"{path}: no change CSV files found")
        days = []
        for f in files:
            days.extend(pipeline.read_changes_csv(f))
    else:
        days = pipeline.read_changes_csv(path)
    days.sort(key=lambda s: s.day)
    return days


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_clean(args):
    ticks, skipped = pipeline.ingest_csv(args.input, schema=_parse_schema(args.schema))
    cleaned, rep = pipeline.clean(ticks)
    out = Path(args.out)
    frame = pd.DataFrame({"timestamp": cleaned.timestamps_ms,
                          "price": cleaned.prices})
    _write_frame_atomic(frame, out / "cleaned_ticks.csv")
    doc = json.loads(rep.to_json())
    doc["ingest_skipped_rows"] = int(skipped)
    _write_text_atomic(out / "cleaning_report.json",
                       json.dumps(doc, sort_keys=True, indent=2) + "\n")
    _echo_config(args, out)
    return 0


def cmd_aggregate(args):
    ticks, _ = pipeline.ingest_csv(args.input, schema=_parse_schema(args.schema))
    days = pipeline.aggregate_last_tick(ticks, args.frequency)
    if not days:
        print("no day produced at least 2 grid points", file=sys.stderr)
        return 2
    out = Path(args.out)
    for day in days:
        _write_text_atomic(out / "changes" / f"{day.day}.csv", _changes_text(day))
    _echo_config(args, out)
    return 0


def _changes_text(day):
    frame = pd.DataFrame({"day": day.day, "time_of_day_s": day.time_of_day,
                          "change_cents": day.changes})
    return frame.to_csv(index=False)


def cmd_scan_nu(args):
    days = _read_changes_input(args.input)
    pooled = np.concatenate([d.changes for d in days])
    grid = _parse_nu_grid(args.nu_grid)
    kinds = (["continuous_density", "interval"] if args.kind == "both"
             else [args.kind])
    scans = [diagnose.nu_scan(pooled, nu_grid=grid, likelihood_kind=k)
             for k in kinds]
    out = Path(args.out)
    _write_frame_atomic(report.scan_frame(scans), out / "scan" / "nu_scan.csv")
    _echo_config(args, out)
    return 0


def _model_list(text):
    return [ModelSpec.from_cli_name(name) for name in text.split(",") if name]


def _summary_frame(specs, summaries):
    row_names = [r for r in EXTRA_SUMMARY_ROWS
                 if any(r in s.param_names for s in specs)]
    row_names += list(CORE_SUMMARY_ROWS)
    rows = []
    for row in row_names:
        cells = {"statistic": row}
        for spec, summary in zip(specs, summaries):
            if row in summary.medians and summary.medians[row] is not None:
                cells[spec.cli_name] = f"{summary.medians[row]:.6g}"
            else:
                cells[spec.cli_name] = SENTINEL
        rows.append(cells)
    tail = {"statistic": "n_days"}
    tail2 = {"statistic": "n_not_converged"}
    for spec, summary in zip(specs, summaries):
        tail[spec.cli_name] = str(summary.n_days)
        tail2[spec.cli_name] = str(summary.n_not_converged)
    rows.extend([tail, tail2])
    return pd.DataFrame(rows, columns=["statistic"] + [s.cli_name for s in specs])


def cmd_fit(args):
    days = _read_changes_input(args.input)
    specs = _model_list(args.models)
    regime = estimate.BoundRegime.preset(args.regime)
    out = Path(args.out)

    profiles = None
    if args.diurnal == "per-day":
        profiles = [diurnal.estimate_profile(d) for d in days]
    elif args.diurnal == "pooled":
        prof = diurnal.estimate_profile(days)
        profiles = [prof] * len(days)
    if profiles is not None:
        for day, prof in zip(days, profiles):
            _write_text_atomic(out / "profiles" / f"{day.day}.json",
                               prof.to_json() + "\n")

    warnings = 0
    summaries = []
    for spec in specs:
        fits, summary = estimate.fit_all_days(
            days, spec, regime, profiles=profiles, threads=args.threads,
            budget=args.budget)
        summaries.append(summary)
        warnings += summary.n_not_converged
        for fit in fits:
            name = f"{fit.day}__{spec.cli_name}.json"
            _write_text_atomic(out / "fits" / name, fit.to_json() + "\n")
    _write_frame_atomic(_summary_frame(specs, summaries),
                        out / "fits" / "summary.csv")
    _echo_config(args, out)
    return 1 if warnings else 0


def _load_fits(fit_dir):
    fits = []
    for path in sorted(Path(fit_dir).glob("*__*.json")):
        fits.append(estimate.FitResult.from_json_dict(json.loads(path.read_text())))
    if not fits:
        raise IngestError(f"{fit_dir}: no fit JSON files found")
    return fits


def cmd_eval(args):
    fits = _load_fits(args.fits)
    days = {d.day: d for d in _read_changes_input(args.input)}
    day_order = sorted(days)
    profile_dir = Path(args.fits).parent / "profiles"

    per_model = {}
    failed_days = {}
    for fit in fits:
        later = [d for d in day_order if d > fit.day]
        if not later or not fit.converged:
            continue
        next_day = days[later[0]]
        prof = None
        prof_path = profile_dir / f"{fit.day}.json"
        if prof_path.exists():
            prof = diurnal.DiurnalProfile.from_json(prof_path.read_text())
        res = diagnose.evaluate_next_day(fit, next_day, s_hat=prof)
        model = fit.spec.cli_name
        per_model.setdefault(model, []).append(res)
        failed_days.setdefault(model, 0)
        if res.failed:
            failed_days[model] += 1

    if not per_model:
        print("no (fit day, next day) pair available", file=sys.stderr)
        return 2

    models = sorted(per_model)
    rows = []
    for label, attr in (("loglik_oos", "loglik_avg_oos"), ("A_oos", "archlm_oos")):
        cells = {"statistic": label}
        for model in models:
            vals = [getattr(r, attr) for r in per_model[model]
                    if getattr(r, attr) is not None]
            cells[model] = f"{float(np.median(vals)):.6g}" if vals else SENTINEL
        rows.append(cells)
    tail = {"statistic": "failed_days"}
    tail2 = {"statistic": "evaluated_days"}
    for model in models:
        tail[model] = str(failed_days[model])
        tail2[model] = str(len(per_model[model]))
    rows.extend([tail, tail2])
    frame = pd.DataFrame(rows, columns=["statistic"] + models)
    out = Path(args.out)
    _write_frame_atomic(frame, out / "eval" / "evaluation.csv")
    _echo_config(args, out)
    return 1 if any(failed_days.values()) else 0


def cmd_simulate(args):
    doc = json.loads(Path(args.spec_file).read_text())
    spec = ModelSpec.from_cli_name(doc["model"])
    params = ParamVector.from_dict(spec, doc["params"])
    prof = None
    if doc.get("diurnal"):
        prof = diurnal.DiurnalProfile.from_json(Path(doc["diurnal"]).read_text())
    sim_spec = SimSpec(model=spec, params=params, n=int(doc["n"]),
                       days=int(doc.get("days", 1)),
                       seed=int(doc.get("seed", args.seed or 0)),
                       diurnal=prof)
    out = Path(args.out)
    for day in simulate(sim_spec):
        _write_text_atomic(out / "changes" / f"{day.day}.csv", _changes_text(day))
    _echo_config(args, out)
    return 0


def cmd_report(args):
    src = Path(args.input)
    out = Path(args.out)
    made = []

    changes_dir = src / "changes"
    days = _read_changes_input(changes_dir) if changes_dir.is_dir() else []

    scan_path = src / "scan" / "nu_scan.csv"
    scan_frame = pd.read_csv(scan_path) if scan_path.exists() else None

    if days:
        hist = report.histogram_frame(days)
        _write_frame_atomic(hist, out / "fig_hist.csv")
        dens = None
        if scan_frame is not None:
            cont = scan_frame[scan_frame["kind"] == "continuous_density"]
            if len(cont):
                scan_obj = diagnose.NuScanResult(
                    nu_grid=cont["nu"].to_numpy(),
                    sigma2_hat=cont["sigma2_hat"].to_numpy(),
                    loglik_avg=cont["loglik_avg"].to_numpy(),
                    floored=cont["floored"].to_numpy(dtype=bool),
                    kind="continuous_density")
                dens = report.density_overlay_frame(days, scan_obj)
                _write_frame_atomic(dens, out / "fig_density.csv")
        _write_bytes_atomic(out / "fig_hist_density.png",
                            lambda p: report.render_hist_density(hist, dens, p))
        made.append("fig_hist_density")

    if scan_frame is not None:
        _write_frame_atomic(scan_frame, out / "fig_scan.csv")
        _write_bytes_atomic(out / "fig_scan.png",
                            lambda p: report.render_scan(scan_frame, p))
        made.append("fig_scan")

    fits_dir = src / "fits"
    if days and fits_dir.is_dir() and list(fits_dir.glob("*__*.json")):
        fits = _load_fits(fits_dir)
        by_model = {}
        day_map = {d.day: d for d in days}
        for fit in fits:
            if fit.converged and fit.day in day_map:
                by_model.setdefault(fit.spec.cli_name, []).append(fit)
        by_model = {m: fl for m, fl in by_model.items() if fl}
        if by_model:
            frame = _diff_frame(by_model, day_map, src)
            _write_frame_atomic(frame, out / "fig_fit_diff.csv")
            _write_bytes_atomic(out / "fig_fit_diff.png",
                                lambda p: report.render_fit_difference(frame, p))
            made.append("fig_fit_diff")

    if not made:
        print("nothing to report: need changes/, scan/ or fits/ under the input "
              "directory", file=sys.stderr)
        return 2
    _echo_config(args, out)
    return 0


def _diff_frame(by_model, day_map, src):
    profile_dir = src / "profiles"
    fits_by_model = {}
    days_common = None
    for model, fits in by_model.items():
        fit_days = [f.day for f in fits]
        days_common = fit_days if days_common is None else [
            d for d in days_common if d in fit_days]
    days_common = days_common or []
    day_list = [day_map[d] for d in days_common]
    profiles = []
    for d in days_common:
        p = profile_dir / f"{d}.json"
        profiles.append(diurnal.DiurnalProfile.from_json(p.read_text())
                        if p.exists() else None)
    for model, fits in by_model.items():
        fit_map = {f.day: f for f in fits}
        fits_by_model[model] = [fit_map[d] for d in days_common]
    return report.fit_difference_frame(fits_by_model, day_list, profiles=profiles)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="tickvol",
        description="Volatility models for high-frequency integer price changes.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="input file or directory")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--config", help="key=value config file (flags override)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int,
                       default=int(os.environ.get(THREADS_ENV, "1")))

    p = sub.add_parser("clean", help="clean raw tick data")
    common(p)
    p.add_argument("--schema", help="timestamp=COL,price=COL[,unit=dollars|cents]")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("aggregate", help="last-tick aggregation to a fixed frequency")
    common(p)
    p.add_argument("--schema", help="timestamp=COL,price=COL[,unit=dollars|cents]")
    p.add_argument("--frequency", type=float, required=True,
                   help="seconds per grid step (e.g. 0.1, 1, 10, 60, 300)")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("scan-nu", help="static-model degrees-of-freedom scan")
    common(p)
    p.add_argument("--nu-grid", help="lo:hi:count (log-spaced) or comma list")
    p.add_argument("--kind", default="both",
                   choices=["continuous_density", "interval", "both"])
    p.set_defaults(func=cmd_scan_nu)

    p = sub.add_parser("fit", help="fit daily models")
    common(p)
    p.add_argument("--models", required=True,
                   help="comma list: garch-t,gas-t,static-t,normal,t,skellam,zi-skellam")
    p.add_argument("--regime", default="unbounded",
                   choices=sorted(estimate.REGIME_PRESETS))
    p.add_argument("--diurnal", default="none",
                   choices=["none", "per-day", "pooled"])
    p.add_argument("--budget", type=int, default=4000,
                   help="objective evaluations per day fit")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="next-day evaluation of saved fits")
    common(p)
    p.add_argument("--fits", required=True, help="directory of fit JSON files")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="generate synthetic change series")
    common(p, needs_input=False)
    p.add_argument("--spec-file", required=True,
                   help="JSON: model, params, n, days, seed[, diurnal]")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="figure-data CSVs and rendered figures")
    common(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = _build_parser()
    args = parser.parse_args(argv)
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg = _load_config(args.config)
        except (OSError, DomainError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    explicit = {tok[2:].split("=", 1)[0].replace("-", "_")
                for tok in argv if tok.startswith("--")}
    for key, val in cfg.items():
        if key in explicit or not hasattr(args, key):
            continue  # flags override the config file
        current = getattr(args, key)
        if isinstance(current, bool):
            val = val.lower() in ("1", "true", "yes")
        elif isinstance(current, int):
            val = int(val)
        elif isinstance(current, float):
            val = float(val)
        setattr(args, key, val)
    try:
        return args.func(args)
    except (IngestError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except TickvolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
