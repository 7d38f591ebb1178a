"""Command-line entry point ``nschlab``.

Exit codes: 0 success, 2 configuration error, 3 divergence, 4 violation of
a constant-1 inequality. Failures print one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from pathlib import Path

from . import __version__, config as cfgmod, kernels
from .diagnostics import csv_columns, csv_row, validity_horizon
from .errors import ConfigError, StepDiverged
from .presets import EXIT_CONFIG, EXIT_DIVERGED, run_preset

COMMANDS = ("run", "energy-check", "smallness", "decay-study", "ineq-suite", "info")


def build_parser():
    parser = argparse.ArgumentParser(prog="nschlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nschlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", help="JSON run configuration")
        if name == "info":
            continue
        p.add_argument("--seed", type=int, help="override ic.seed")
        p.add_argument("--output", metavar="DIR", default=".", help="directory for CSV/JSON/checkpoints")
        p.add_argument("--linearized", action="store_true", help="drop every nonlinear term")
        p.add_argument(
            "--paper-mode",
            action=argparse.BooleanOptionalAction,
            default=None,
            help="pin the model constants (default: on)",
        )
    return parser


def resolve_config(args) -> cfgmod.RunConfig:
    """Load or build the configuration and apply command-line overrides."""
    if args.config:
        cfg = cfgmod.load(args.config)
        if args.command not in ("run", "info") and cfg.experiment != args.command:
            cfg = cfg.replace(experiment=args.command)
    else:
        exp = "run" if args.command in ("run", "info") else args.command
        cfg = cfgmod.default_config(exp)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(ic=dataclasses.replace(cfg.ic, seed=args.seed))
    changes = {}
    if getattr(args, "linearized", False):
        changes["linearized"] = True
    if getattr(args, "paper_mode", None) is not None:
        changes["paper_mode"] = args.paper_mode
    if changes:
        try:
            cfg = cfg.replace(params=dataclasses.replace(cfg.params, **changes))
        except ValueError as exc:
            raise ConfigError(str(exc), "params") from None
    return cfg


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_json_safe(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_csv(path, records):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(csv_columns(records[0]))
        for r in records:
            writer.writerow(csv_row(r))


def _series_path(base: Path, name):
    if name == "main":
        return base
    return base.with_name(f"{base.stem}_{name}{base.suffix}")


def write_outputs(cfg, result, out_dir: Path):
    written = []
    if cfg.outputs.csv:
        base = out_dir / cfg.outputs.csv
        for name, records in result.series.items():
            if records:
                path = _series_path(base, name)
                write_csv(path, records)
                written.append(str(path))
    if cfg.outputs.json:
        path = out_dir / cfg.outputs.json
        report = dict(result.report)
        report["config"] = cfgmod.to_dict(cfg)
        path.write_text(dumps(report))
        written.append(str(path))
    return written


def _prepare_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory not writable: {exc.strerror}", "outputs") from None
    return out


def info(cfg):
    return {
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "available_backends": kernels.available_backends(),
        "commands": list(COMMANDS),
        "experiments": list(cfgmod.EXPERIMENTS),
        "validity_horizon": validity_horizon(cfg.grid.box_length),
        "config": cfgmod.to_dict(cfg),
    }


def _fail(payload, code):
    sys.stderr.write(dumps(payload))
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "info":
            sys.stdout.write(dumps(info(cfg)))
            return 0
        out_dir = _prepare_dir(args.output)
        result = run_preset(cfg, out_dir)
        written = write_outputs(cfg, result, out_dir)
    except ConfigError as exc:
        return _fail(exc.to_dict(), EXIT_CONFIG)
    except StepDiverged as exc:
        return _fail(exc.to_dict(), EXIT_DIVERGED)
    summary = {"experiment": cfg.experiment, "status": result.status, "outputs": written}
    if result.status:
        summary["error"] = "inequality violation"
        return _fail(summary, result.status)
    sys.stdout.write(dumps(summary))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
