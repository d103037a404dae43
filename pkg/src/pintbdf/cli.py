"""Command line entry point: ``pintbdf run|sweep|verify-tables``."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .harness import (EXIT_CONFIG, EXIT_DIVERGED, EXIT_OK, ConfigError, ExperimentSpec, format_verification,
                      run_experiment, sweep, verify_tables)

FLAG_KEYS = ("example", "k", "alpha", "kappa", "kappa_rule", "N", "h", "T", "tol", "max_iters", "threads", "out",
             "eps_w", "initial_guess")


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key=value file; flags override it")
    p.add_argument("--example", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--kappa-rule", dest="kappa_rule", choices=("fixed", "log"))
    p.add_argument("--N", type=int)
    p.add_argument("--h", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--threads", help="worker count or 'auto'")
    p.add_argument("--out", help="output directory (default: $OUT_DIR or ./runs)")
    p.add_argument("--eps-w", dest="eps_w", type=float, help="interface width (example 4)")
    p.add_argument("--initial-guess", dest="initial_guess", choices=("zero", "v"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pintbdf", description="Parallel-in-time BDF / CQ-BDF experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment and write convergence.csv / summary.txt")
    _add_spec_flags(run)
    sw = sub.add_parser("sweep", help="vary one parameter and write sweep.csv")
    _add_spec_flags(sw)
    sw.add_argument("--vary", required=True, help="kappa, N, alpha, T, eps_w or k")
    sw.add_argument("--values", required=True, help="comma-separated values")
    vt = sub.add_parser("verify-tables", help="compare the presets against the reference tables")
    vt.add_argument("--threads", type=int, default=1)
    return parser


def spec_from_args(args) -> ExperimentSpec:
    overrides = {key: getattr(args, key, None) for key in FLAG_KEYS}
    if overrides["threads"] is not None:
        overrides["threads"] = str(overrides["threads"])
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        return ExperimentSpec.from_config(text, **overrides)
    example = overrides.pop("example") or 1
    return ExperimentSpec.preset(example, **overrides)


def _out_path(args, spec):
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("OUT_DIR") or spec.out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify-tables":
        report = verify_tables(threads=args.threads)
        sys.stdout.write(format_verification(report))
        return EXIT_OK if report["passed"] else EXIT_DIVERGED
    try:
        spec = spec_from_args(args)
        out = _out_path(args, spec)
        if args.command == "run":
            res = run_experiment(spec, out)
            print(f"{res.status}: {res.iters} iterations, gamma={res.gamma:.3e}, floor={res.floor:.3e}, "
                  f"wall={res.wall_ms:.1f} ms -> {out}")
            if res.message:
                print(res.message, file=sys.stderr)
            return res.exit_code
        results = sweep(spec, args.vary, [v for v in args.values.split(",") if v.strip()], out)
        for val, res in results:
            print(f"{args.vary}={val}: {res.status}, gamma={res.gamma:.3e}, floor={res.floor:.3e}")
        return EXIT_OK
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
