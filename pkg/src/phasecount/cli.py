"""Command-line harness.

Subcommands
    fi-curve    Fisher-information curves over a phase grid (CSV)
    simulate    estimator trajectories vs pulse count for seeded trials (CSV)
    saturate    mean 1/(m*Var) against the FI per (phi, m) cell (CSV)
    povm-check  cross-validation of the count likelihood vs the Fock oracle

Exit codes: 0 success, 1 configuration error, 2 numerical-check failure.
"""

from __future__ import annotations

import argparse
import sys

import yaml

from . import bench, runconfig
from .bayes import PosteriorUnderflowError
from .fisher import FiConvergenceError
from .photonics import FockTruncationError, ModelMismatchError
from .runconfig import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasecount",
        description="Phase-estimation benchmarks for a displaced-photon-counting receiver.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_out, help_text in (
        ("fi-curve", True, "Fisher-information curves over a phase grid"),
        ("simulate", True, "seeded estimator trajectories vs pulse count"),
        ("saturate", True, "mean 1/(m*Var) vs the Fisher information"),
        ("povm-check", False, "likelihood vs Fock-space oracle cross-check"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="YAML run configuration")
        cmd.add_argument("--out", required=needs_out,
                         help="output CSV path" if needs_out else "optional report path")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the configured master seed")
        cmd.add_argument("--trials", type=int, default=None,
                         help="override the configured trial count")
        cmd.add_argument("--threads", type=int, default=1,
                         help="worker threads for independent trials")
    return parser


_PARSERS = {
    "fi-curve": runconfig.parse_fi_curve,
    "simulate": runconfig.parse_simulate,
    "saturate": runconfig.parse_saturate,
    "povm-check": runconfig.parse_povm_check,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG

    try:
        cfg = runconfig.load_config(args.config)
        run = _PARSERS[args.command](cfg)
        if args.seed is not None or args.trials is not None:
            run = runconfig.apply_overrides(run, seed=args.seed, trials=args.trials)

        if args.command == "fi-curve":
            result = bench.run_fi_curve(run)
        elif args.command == "simulate":
            result = bench.run_simulate(run, threads=args.threads)
        elif args.command == "saturate":
            result = bench.run_saturate(run, threads=args.threads)
        else:
            return _povm_check(run, args.out)

        bench.write_csv(args.out, result)
        bench.write_metadata(args.out, result)
        print(f"wrote {len(result.rows)} rows to {args.out}")
        return EXIT_OK

    except (ConfigError, ModelMismatchError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, yaml.YAMLError) as exc:
        print(f"error reading configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FockTruncationError, FiConvergenceError, PosteriorUnderflowError) as exc:
        print(f"numerical check failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def _povm_check(run, out_path) -> int:
    lines, _, passed = bench.run_povm_check(run)
    report = "\n".join(lines) + "\n"
    print(report, end="")
    if out_path:
        with open(out_path, "w", encoding="ascii", newline="") as fh:
            fh.write(report)
    return EXIT_OK if passed else EXIT_NUMERIC


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
