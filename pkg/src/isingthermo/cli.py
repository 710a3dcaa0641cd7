"""Command-line entry point: ``isingthermo <verb> --config FILE [--seed N] [--out PATH]``."""
from __future__ import annotations

import argparse
import logging
import sys

from .dynamics import PropagationError
from .experiments import ConfigError, load_config, run
from .spectral import EigensolverError

VERBS = {
    "sweep-quench": "quench_sweep",
    "sweep-ramp": "ramp_sweep",
    "sweep-optimize": "optimize_sweep",
    "trace": "convergence_trace",
    "transfer": "transfer",
    "work-compare": "work_compare",
    "convergence": "convergence",
}

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2

log = logging.getLogger("isingthermo")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isingthermo", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, experiment in VERBS.items():
        p = sub.add_parser(verb, help=f"run the {experiment} experiment")
        p.add_argument("--config", required=True, help="INI file with an [experiment] section")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="CSV path ('-' for stdout)")
        p.add_argument("--workers", type=int, default=None, help="worker processes for sweeps")
        if verb in ("transfer", "convergence"):
            p.add_argument("--pulses", default=None, help="pulse file or directory of pulse files")
        if verb == "transfer":
            p.add_argument("--target-n-spins", type=int, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(
            args.config,
            experiment=VERBS[args.verb],
            seed=args.seed,
            workers=args.workers,
            pulses=getattr(args, "pulses", None),
            target_n_spins=getattr(args, "target_n_spins", None),
        )
        run(cfg, args.out)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (PropagationError, EigensolverError, FloatingPointError, ArithmeticError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
