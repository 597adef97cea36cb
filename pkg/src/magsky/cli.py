"""Command-line entry point: ``magsky <command> [--config F | --preset P] ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import PRESETS, ConfigError, parse_config, with_overrides
from .runner import run_coupling_map, run_dynamics, run_feasibility_report, run_squeeze_sweep

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2

log = logging.getLogger("magsky")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="magsky", description="Magnon-skyrmion hybrid system simulator.")
    p.add_argument("--version", action="version", version=f"magsky {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("coupling-map", "coupling strength and cooperativity over device geometry"),
        ("dynamics", "population dynamics of a scenario"),
        ("feasibility", "JSON report of headline device numbers"),
        ("squeeze-sweep", "squeezing-enhanced coupling over drive ratios"),
    ):
        s = sub.add_parser(name, help=help_)
        src = s.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="path to a JSON run config")
        src.add_argument("--preset", choices=PRESETS, help="named figure preset")
        s.add_argument("--out", help="output file (default: config 'output' or stdout)")
        s.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
        s.add_argument("--nmax", type=int, help="magnon Fock truncation")
        s.add_argument("--rel-tol", type=float, help="integrator relative tolerance")
        if name == "dynamics":
            s.add_argument("--check-nmax", action="store_true", help="rerun at N_max+5 and fail points that move by >1e-6")
    return p


def _emit(text: str, path: str | None):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = parse_config(args.config if args.config else args.preset)
        cfg = with_overrides(cfg, n_max=args.nmax, rel_tol=args.rel_tol)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        out = args.out or cfg.output
        if args.command == "feasibility":
            report = run_feasibility_report(cfg)
            _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", out)
            return EXIT_OK
        if args.command == "coupling-map":
            report = run_coupling_map(cfg, args.threads)
        elif args.command == "dynamics":
            report = run_dynamics(cfg, args.threads, check_nmax=args.check_nmax)
        else:
            report = run_squeeze_sweep(cfg, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(report.to_csv(), out)
    if report.failures:
        log.warning("%d of %d points failed", report.failures, len(report.rows))
        return EXIT_PARTIAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
