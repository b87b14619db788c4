"""Command line entry point: ``quatppf {simulate,validate,reproduce-paper,sweep}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import ValidationError, load_config, paper_config, validate
from .simulate import NumericalAbort, run, summarize, sweep, write_log

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ABORT = 3


def _base_config(path):
    return load_config(path) if path else paper_config()


def _apply_overrides(cfg, args):
    changes = {}
    for name in ("seed", "noise_std", "duration", "dt"):
        value = getattr(args, name, None)
        if value is not None:
            changes[name] = value
    return cfg.replace(**changes) if changes else cfg


def _print_summary(summary):
    print(json.dumps(summary, indent=2, sort_keys=True))


def _simulate(cfg, out, show_summary):
    validate(cfg)
    records = run(cfg)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        write_log(records, out, cfg)
    if show_summary:
        _print_summary(summarize(records, cfg))
    return records


def cmd_simulate(args):
    cfg = _apply_overrides(_base_config(args.config), args)
    _simulate(cfg, args.out, args.summary)
    return EXIT_OK


def cmd_validate(args):
    validate(load_config(args.config))
    print(f"{args.config}: ok")
    return EXIT_OK


def cmd_reproduce(args):
    cfg = paper_config()
    if args.noise_free:
        cfg = cfg.replace(noise_std=0.0)
    cfg = _apply_overrides(cfg, args)
    _simulate(cfg, args.out, True)
    return EXIT_OK


def cmd_sweep(args):
    base = _apply_overrides(_base_config(args.config), args)
    validate(base)
    if args.out_dir:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    configs = [base.replace(seed=args.first_seed + i) for i in range(args.seeds)]
    for s in sweep(configs, args.workers, args.out_dir):
        print(json.dumps(s, sort_keys=True))
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="quatppf", description="Observer-based attitude tracking with prescribed performance.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def overrides(p):
        p.add_argument("--seed", type=int, help="override the noise seed")
        p.add_argument("--noise-std", type=float, dest="noise_std", help="override the per-axis noise std")
        p.add_argument("--duration", type=float, help="override the run length, s")
        p.add_argument("--dt", type=float, help="override the step size, s")

    p = sub.add_parser("simulate", help="run one closed-loop simulation and write a CSV log")
    p.add_argument("--config", help="YAML config file (default: reference experiment)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--summary", action="store_true", help="print final error norms as JSON")
    overrides(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="check a config file and report every problem")
    p.add_argument("--config", required=True, help="YAML config file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("reproduce-paper", help="run the built-in reference experiment")
    p.add_argument("--out", help="optional output CSV path")
    p.add_argument("--noise-free", action="store_true", help="set the noise std to zero")
    overrides(p)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("sweep", help="run several seeds in parallel")
    p.add_argument("--config", help="YAML config file (default: reference experiment)")
    p.add_argument("--seeds", type=int, default=20, help="number of seeds (default 20)")
    p.add_argument("--first-seed", type=int, default=0, help="first seed of the range")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: CPU count)")
    p.add_argument("--out-dir", help="write one CSV per seed here")
    overrides(p)
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
