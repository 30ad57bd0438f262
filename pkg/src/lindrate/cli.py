"""Command-line entry point: ``lindrate sweep | converge | validate``.

Exit codes: 0 success, 1 configuration error, 2 numerical divergence,
3 validation failure.
"""
from __future__ import annotations

import argparse
import sys

from .harness import (
    ConfigError,
    ExperimentConfig,
    build_config,
    convergence_study,
    convergence_to_csv,
    read_config_file,
    parse_assignments,
    rows_to_csv,
    rows_to_json,
    run_experiment,
)
from .lindblad import DivergenceError

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_VALIDATION = 0, 1, 2, 3

# flag name -> config key
FLAG_KEYS = {
    "model": "model", "picture": "picture", "evolver": "evolver", "steps": "steps",
    "t_start": "t_start", "t_end": "t_end", "t_count": "t_count",
    "shots": "shots", "seed": "seed", "out": "out",
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--preset", help="named preset: spin_half, cl_desk, cl_full")
    p.add_argument("--model", choices=["spin_half", "caldeira_leggett"])
    p.add_argument("--picture", choices=["heisenberg", "schrodinger"])
    p.add_argument("--evolver", choices=["exact", "modular", "rk4"])
    p.add_argument("--steps", type=int, help="modular step count N per time point")
    p.add_argument("--t-start", dest="t_start", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--t-count", dest="t_count", type=int)
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", action="store_true", help="write JSON instead of CSV")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lindrate", description="Transition-rate experiments for Lindblad dynamics.")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("sweep", help="C(t) and Cdot(t) over a time grid"))
    conv = sub.add_parser("converge", help="relative error against the exact oracle versus modular N")
    _common(conv)
    conv.add_argument("--n-list", dest="n_list", default="10,20,40,80,160")
    conv.add_argument("--t-fixed", dest="t_fixed", type=float, default=1.0)
    sub.add_parser("validate", help="run the built-in invariant checks")
    return parser


def config_from_args(args) -> "ExperimentConfig":
    file_values = read_config_file(args.config) if args.config else {}
    cli = {key: getattr(args, flag) for flag, key in FLAG_KEYS.items() if getattr(args, flag) is not None}
    if args.json:
        cli["json"] = True
    cli.update(parse_assignments(args.overrides))
    return build_config(args.preset, file_values, cli)


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    if args.command == "validate":
        from .validation import run_checks

        results = run_checks()
        for name, ok, detail in results:
            print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_VALIDATION
    try:
        config = config_from_args(args)
        if args.command == "sweep":
            rows = run_experiment(config, jobs=args.jobs)
            _emit(rows_to_json(rows, config) if config.json else rows_to_csv(rows, config), config.out)
        else:
            try:
                n_list = [int(x) for x in args.n_list.split(",") if x.strip()]
            except ValueError:
                raise ConfigError("n_list", f"cannot parse {args.n_list!r}") from None
            table = convergence_study(config, n_list, args.t_fixed, jobs=args.jobs)
            _emit(convergence_to_csv(table, config, args.t_fixed), config.out)
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, FloatingPointError) as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
