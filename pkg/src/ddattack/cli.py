"""Command-line entry point: ``ddattack <command> --config CONFIG --out DIR``.

Exit codes: 0 on success, 2 on a configuration error, 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiment
from .errors import ConfigError, NumericalError

log = logging.getLogger("ddattack")

COMMANDS = {
    "generate": (experiment.run_generate, "write the system matrices as JSON"),
    "indices": (experiment.run_indices, "observability/excitability indices and safe horizons"),
    "rank-curve": (experiment.run_rank_curve, "Hankel rank vs horizon on nominal data (CSV)"),
    "monitor": (experiment.run_monitor_experiment, "run both attack monitors on a simulated stream"),
    "synthesize-attack": (experiment.run_synthesize, "construct an undetectable attack window"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddattack", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="experiment config JSON, or 'companion50' for the shipped fixture")
        p.add_argument("--out", required=True, type=Path, help="output directory")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--threshold", type=float, help="override the monitor threshold")
        p.add_argument("--tol-rel", type=float, help="override the relative rank cutoff")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    run, _ = COMMANDS[args.command]
    try:
        cfg = experiment.ExperimentConfig.load(args.config).with_overrides(
            seed=args.seed, threshold=args.threshold, tol_rel=args.tol_rel
        )
        summary = run(cfg, args.out)
    except (ConfigError, ValueError) as exc:
        log.error("config error: %s", exc)
        return 2
    except (NumericalError, np.linalg.LinAlgError, ArithmeticError) as exc:
        log.error("numerical failure: %s", exc)
        return 3
    print(json.dumps(summary, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
