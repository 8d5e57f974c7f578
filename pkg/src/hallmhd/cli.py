"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 blow-up detected, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, parse_config
from .harness import emit, emit_sweep, epsilon_sweep, run_single

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_IO = 4


def _add_common_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, default=None, help="YAML configuration file")
    p.add_argument("--epsilon", type=float, default=None, help="shell half-width")
    p.add_argument("--n", type=int, default=None, dest="n_per_axis", help="modes per axis")
    p.add_argument("--box", type=float, default=None, dest="box_length", help="box side length")
    p.add_argument("--dt", type=float, default=None, help="time step")
    p.add_argument("--tend", type=float, default=None, dest="t_end", help="final time")
    p.add_argument("--cadence", type=int, default=None, dest="output_cadence",
                   help="steps between diagnostic records")
    p.add_argument("--smallness-C", type=float, default=None, dest="smallness_C",
                   help="constant C in the size functional")
    p.add_argument("--eta", type=str, default=None,
                   help="bootstrap threshold (number or 'auto')")
    p.add_argument("--strict-linf", action="store_true", default=None, dest="strict_linf",
                   help="compute sup norms on a 2x oversampled grid")
    p.add_argument("--no-hall", action="store_false", default=None, dest="hall_enabled",
                   help="disable the Hall term (ablation)")
    p.add_argument("--out", type=str, default="out", help="output directory")


def _overrides_from_args(args: argparse.Namespace) -> dict:
    keys = (
        "epsilon", "n_per_axis", "box_length", "dt", "t_end",
        "output_cadence", "smallness_C", "eta", "strict_linf", "hall_enabled",
    )
    out = {}
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            out[k] = v
    if "eta" in out and out["eta"] != "auto":
        out["eta"] = float(out["eta"])
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hallmhd",
        description="Pseudo-spectral Hall-MHD runs on annulus-supported Beltrami data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="single experiment: build data, evolve, emit report")
    _add_common_overrides(run_p)
    run_p.add_argument("--delta", type=float, default=None,
                       help="threshold for the informational smallness comparison")

    sweep_p = sub.add_parser("sweep", help="epsilon sweep of the initial-norm table")
    _add_common_overrides(sweep_p)
    sweep_p.add_argument("--epsilons", type=str, required=True,
                         help="comma-separated shell half-widths")
    sweep_p.add_argument("--evolve", action="store_true",
                         help="also run the full dynamics for every epsilon")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = parse_config(args.config, _overrides_from_args(args))
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "run":
            report = run_single(config, delta=args.delta)
            csv_path, json_path = emit(report, Path(args.out))
            print(f"wrote {csv_path} and {json_path}")
            if report.blowup is not None:
                print(
                    f"blow-up at t={report.blowup['t']:.6g} ({report.blowup['norm']})",
                    file=sys.stderr,
                )
                return EXIT_BLOWUP
            failed = [k for k, v in report.verdicts.items() if not v["ok"]]
            if failed:
                print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
            return EXIT_OK

        epsilons = [float(tok) for tok in args.epsilons.split(",") if tok.strip()]
        try:
            sweep = epsilon_sweep(epsilons, config, evolve_runs=args.evolve)
        except (ConfigError, ValueError) as exc:
            print(f"configuration error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        csv_path, json_path = emit_sweep(sweep, Path(args.out))
        print(f"wrote {csv_path} and {json_path}")
        if sweep.degenerate_fit:
            print("single-point sweep: power-law fit skipped", file=sys.stderr)
        return EXIT_OK
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
