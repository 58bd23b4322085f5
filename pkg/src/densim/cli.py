"""``densim`` command line: feasibility, sweep, verify and emit-plot.

Exit codes: 0 success or pass, 1 verification failed, 2 infeasible model,
3 numeric failure, 64 usage or config error, 65 malformed input data.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .checks import CHECKS, run_check
from .config import load_config
from .errors import DensimError, InfeasibleModelError, NumericError
from .experiments import run_sweep
from .pathloss import check_feasibility

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERIC = 3
EXIT_USAGE = 64
EXIT_DATAERR = 65

OUT_DIR_ENV = "DENSIM_OUT_DIR"

CSV_HEADER = (
    "density_per_km2", "scenario", "n_t", "n_r", "trials", "mean_sinr", "mean_sinr_db", "mean_sinr_norm",
    "mean_ase", "ase_gain_vs_half", "ci95_sinr", "ci95_ase", "truncation_fraction",
)

_REQUIRED = ("density_per_km2", "n_t", "n_r", "trials")

# (column, y-axis scale) for each plot-data series
PLOT_SERIES = (
    ("mean_sinr_db", "linear"),
    ("mean_sinr_norm", "log"),
    ("mean_ase", "log"),
    ("ase_gain_vs_half", "linear"),
)


class MalformedInputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits: {text}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="INI run configuration")
    common.add_argument("--out", help=f"output directory (default: ${OUT_DIR_ENV} or .)")
    common.add_argument("--seed", type=_u64, help="master seed, overrides [seed] master")
    common.add_argument("--trials", type=_positive_int, help="trials per density, overrides [sweep] trials")
    common.add_argument("--workers", type=_positive_int, default=1, help="worker processes (results do not depend on it)")

    parser = _Parser(prog="densim", description="Dense cellular network SINR scaling simulator.")
    parser.add_argument("--version", action="version", version=f"densim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("feasibility", parents=[common], help="check the path-loss model of a config")
    sub.add_parser("sweep", parents=[common], help="run a density sweep and write a CSV")
    p = sub.add_parser("verify", parents=[common], help="run one verification check")
    p.add_argument("check", choices=CHECKS)
    p = sub.add_parser("emit-plot", help="turn a sweep CSV into a plot-data file")
    p.add_argument("csv", help="sweep CSV written by 'densim sweep'")
    p.add_argument("--out", help="output file (default: the CSV path with suffix .dat)")
    return parser


# ---------------------------------------------------------------------------
# output helpers


def _out_dir(arg: str | None) -> Path:
    path = Path(arg or os.environ.get(OUT_DIR_ENV) or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _clean(obj):
    """JSON-safe copy: non-finite floats become null."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):
        return _clean(obj.item())
    return obj


def _write_json(path: Path, payload) -> None:
    text = json.dumps(_clean(payload), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the clock so that manifests are reproducible too
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = dt.datetime.fromtimestamp(int(epoch), dt.timezone.utc)
    else:
        moment = dt.datetime.now(dt.timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def write_manifest(path: Path, command: str, run, started: str, warnings_, outputs) -> None:
    _write_json(path, {
        "command": command,
        "config_digest": run.digest(),
        "master_seed": int(run.sweep.master_seed),
        "tool_version": __version__,
        "started_at": started,
        "finished_at": _timestamp(),
        "warnings": list(warnings_),
        # relative to the manifest, so reruns into another directory match byte for byte
        "outputs": [os.path.relpath(p, path.parent) for p in outputs],
        "config": run.canonical,
    })


def _num(x: float) -> str:
    return "" if not math.isfinite(x) else repr(float(x))


def sweep_rows(result) -> list[list[str]]:
    rows = []
    for r in result.rows:
        rows.append([
            repr(r.density_per_km2), result.scenario, str(r.n_t), str(r.n_r), str(r.trials),
            _num(r.mean_sinr), _num(r.mean_sinr_db), _num(r.mean_sinr_normalized), _num(r.mean_ase),
            _num(r.ase_relative_gain_vs_half_density), _num(r.ci_halfwidth_95), _num(r.ci95_ase),
            _num(r.truncation_fraction),
        ])
    return rows


def write_sweep_csv(path: Path, result) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(sweep_rows(result))


def read_sweep_csv(path) -> list[dict]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise MalformedInputError(f"cannot read {path}: {exc}") from exc
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise MalformedInputError(f"{path}: header does not match the sweep CSV schema")
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(CSV_HEADER):
            raise MalformedInputError(f"{path}:{lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}")
        rec = dict(zip(CSV_HEADER, row))
        for key in CSV_HEADER:
            # metric cells are empty where undefined (first gain row, or -inf dB)
            if key == "scenario" or (key not in _REQUIRED and rec[key] == ""):
                continue
            try:
                float(rec[key])
            except ValueError:
                raise MalformedInputError(f"{path}:{lineno}: {key} = {rec[key]!r} is not a number") from None
        out.append(rec)
    if not out:
        raise MalformedInputError(f"{path}: no data rows")
    return out


def plot_data(rows: list[dict], source: str) -> str:
    """Blank-line separated two-column blocks, one per series, values copied verbatim."""
    lines = [
        f"# plot data transcribed from {source}",
        f"# scenario: {rows[0]['scenario']}",
        "# x: density_per_km2 (log scale)",
    ]
    for column, scale in PLOT_SERIES:
        lines += ["", "", f"# series: {column}", f"# x-scale: log  y-scale: {scale}", f"# density_per_km2 {column}"]
        lines += [f"{r['density_per_km2']} {r[column]}" for r in rows if r[column] != ""]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_feasibility(args) -> int:
    run = load_config(args.config, seed=args.seed, trials=args.trials)
    out = _out_dir(args.out)
    started = _timestamp()
    report = check_feasibility(run.model)
    path = out / "feasibility.json"
    _write_json(path, report.to_dict())
    write_manifest(out / "feasibility.manifest.json", "feasibility", run, started, [], [path])
    print(f"{run.model.describe()}: {'feasible' if report.feasible else 'infeasible'}")
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_sweep(args) -> int:
    run = load_config(args.config, seed=args.seed, trials=args.trials)
    out = _out_dir(args.out)
    started = _timestamp()
    result = run_sweep(run.sweep, workers=args.workers)
    path = out / "sweep.csv"
    write_sweep_csv(path, result)
    write_manifest(out / "sweep.manifest.json", "sweep", run, started, result.warnings, [path])
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {path} ({len(result.rows)} densities)")
    return EXIT_OK


def cmd_verify(args) -> int:
    run = load_config(args.config, seed=args.seed, trials=args.trials)
    out = _out_dir(args.out)
    started = _timestamp()
    report = run_check(args.check, run.sweep, run.verify, workers=args.workers)
    path = out / f"verify_{args.check}.json"
    _write_json(path, report.to_dict())
    warnings_ = report.details.get("warnings", [])
    write_manifest(out / f"verify_{args.check}.manifest.json", f"verify {args.check}", run, started, warnings_, [path])
    status = "PASS" if report.passed else "FAIL"
    print(f"{args.check}: {status} empirical={report.empirical!r} target={report.target!r} "
          f"relative_error={report.relative_error!r}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_emit_plot(args) -> int:
    rows = read_sweep_csv(args.csv)
    out = Path(args.out) if args.out else Path(args.csv).with_suffix(".dat")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(plot_data(rows, Path(args.csv).name), encoding="utf-8")
    print(f"wrote {out}")
    return EXIT_OK


COMMANDS = {"feasibility": cmd_feasibility, "sweep": cmd_sweep, "verify": cmd_verify, "emit-plot": cmd_emit_plot}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InfeasibleModelError as exc:
        print(f"densim: infeasible model: {exc}", file=sys.stderr)
        if exc.report is not None and getattr(args, "config", None):
            _write_json(_out_dir(args.out) / "feasibility.json", exc.report.to_dict())
        return EXIT_INFEASIBLE
    except NumericError as exc:
        print(f"densim: numeric failure: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERIC
    except MalformedInputError as exc:
        print(f"densim: malformed input: {exc}", file=sys.stderr)
        return EXIT_DATAERR
    except (DensimError, OSError) as exc:
        print(f"densim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
