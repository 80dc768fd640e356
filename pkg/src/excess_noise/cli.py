"""Command-line front end: ``excess-noise sweep|describe|validate``.

Exit status is 0 on success, 1 for usage or configuration errors and 2 for
numerical failures (or, for ``validate``, a failed cross-check).
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import logging
import math
import platform
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy
import yaml

from .errors import ExcessNoiseError
from .experiments import EXPERIMENTS, ConfigError, SweepConfig, describe, expand_grid, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2
VALIDATE_SIGMA = 3.0

log = logging.getLogger("excess_noise")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.16e" % float(v)


def write_csv(path: Path, columns, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise UsageError(f"config {path} is not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a mapping at top level")
    return data


_CONFIG_KEYS = {"experiment", "grid", "ensemble_size", "medium", "detection", "base_seed", "output_path", "threads"}


def build_config(args, experiment: str | None = None) -> SweepConfig:
    data = _load_config_file(args.config) if args.config else {}
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown config field")
    name = experiment or getattr(args, "experiment", None) or data.get("experiment")
    if experiment and data.get("experiment") not in (None, experiment):
        raise ConfigError("experiment", f"this command runs {experiment}, config asks for {data['experiment']}")
    if name is None:
        raise ConfigError("experiment", f"not given; valid: {', '.join(EXPERIMENTS)}")
    if name not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {name!r}; valid: {', '.join(EXPERIMENTS)}")
    exp = EXPERIMENTS[name]
    fields = {
        "experiment": name,
        "grid": expand_grid(data.get("grid", exp.grid)),
        "ensemble_size": data.get("ensemble_size", exp.ensemble_size),
        "medium": data.get("medium") or {},
        "detection": data.get("detection") or {},
        "base_seed": data.get("base_seed", 0),
        "output_path": data.get("output_path", f"{name}.csv"),
        "threads": data.get("threads", 1),
    }
    # flags win over the file
    if args.seed is not None:
        fields["base_seed"] = args.seed
    if args.samples is not None:
        fields["ensemble_size"] = args.samples
    if args.out is not None:
        fields["output_path"] = args.out
    if args.threads is not None:
        fields["threads"] = args.threads
    return SweepConfig(**fields)


def _versions() -> dict:
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__, "package": pkg}


def _resolved(cfg: SweepConfig) -> dict:
    return {
        "experiment": cfg.experiment,
        "grid": cfg.grid,
        "ensemble_size": cfg.ensemble_size,
        "medium": cfg.medium_params(),
        "detection": cfg.detection_config().to_dict(),
        "base_seed": cfg.base_seed,
    }


def execute(cfg: SweepConfig) -> tuple[Path, list]:
    """Run a sweep and write the CSV, any side tables and the manifest."""
    start = time.time()
    columns, rows, extras = run_sweep(cfg)
    out = Path(cfg.output_path)
    write_csv(out, columns, rows)
    files = [out.name]
    for key, value in extras.items():
        if isinstance(value, tuple):
            side = out.with_name(f"{out.stem}_{key}{out.suffix or '.csv'}")
            write_csv(side, *value)
            files.append(side.name)
    resolved = _resolved(cfg)
    manifest = {
        "config": resolved,
        "config_hash": hashlib.sha256(json.dumps(resolved, sort_keys=True).encode()).hexdigest()[:16],
        "spec_hashes": extras.get("spec_hashes", []),
        "base_seed": cfg.base_seed,
        "files": files,
        "csv_sha256": hashlib.sha256(out.read_bytes()).hexdigest(),
        "versions": _versions(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "elapsed_seconds": round(time.time() - start, 3),
    }
    out.with_name(out.stem + ".manifest.json").write_text(json.dumps(manifest, indent=2))
    return out, rows


def _add_run_flags(p):
    p.add_argument("--config", metavar="PATH", help="YAML config file")
    p.add_argument("--seed", metavar="U64", type=int, help="base seed (overrides config)")
    p.add_argument("--samples", metavar="N", type=int, help="ensemble size (overrides config)")
    p.add_argument("--out", metavar="PATH", help="output CSV path (overrides config)")
    p.add_argument("--threads", metavar="N", type=int, help="worker processes for ensemble sampling")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="excess-noise", description="Photodetection statistics of random amplifying/absorbing media.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("sweep", help="run an experiment and write CSV + manifest")
    p.add_argument("experiment", nargs="?", help=f"one of: {', '.join(EXPERIMENTS)}")
    _add_run_flags(p)
    p = sub.add_parser("describe", help="explain an experiment")
    p.add_argument("experiment")
    p = sub.add_parser("validate", help="cross-check closed forms against the semiclassical sampler")
    _add_run_flags(p)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "describe":
            try:
                print(describe(args.experiment))
            except KeyError as exc:
                print(exc.args[0], file=sys.stderr)
                return EXIT_USAGE
            return EXIT_OK
        if args.command == "sweep":
            cfg = build_config(args)
            out, _ = execute(cfg)
            print(out)
            return EXIT_OK
        cfg = build_config(args, experiment="oracle_validate")
        out, rows = execute(cfg)
        worst = max(max(abs(r["z1"]), abs(r["z2"])) for r in rows)
        for r in rows:
            print(f"N={int(r['x'])}: z1={r['z1']:+.2f} z2={r['z2']:+.2f}")
        if not math.isfinite(worst) or worst > VALIDATE_SIGMA:
            print(f"FAIL: largest deviation {worst:.2f} sigma", file=sys.stderr)
            return EXIT_NUMERICAL
        print(f"OK: all estimators within {VALIDATE_SIGMA:g} sigma ({out})")
        return EXIT_OK
    except (ConfigError, UsageError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ExcessNoiseError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
