"""Command-line front end: run / converge / validate / metrics."""
from __future__ import annotations

import argparse
import filecmp
import sys
import tempfile
from pathlib import Path

from .config import ConfigError, parse_config, with_overrides
from .model import validate
from .runner import (EXIT_CONFIG_ERROR, EXIT_DIAGNOSTIC_FAIL, EXIT_OK, execute,
                     recompute_metrics, run_converge, run_single)


def _load_config(args: argparse.Namespace):
    text = Path(args.config).read_text()
    config = parse_config(text)
    return with_overrides(config, particles=args.n, t_final=args.t_final)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="path to a TOML run configuration")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--n", type=int, default=None, help="override the particle count")
    parser.add_argument("--t-final", type=float, default=None, help="override the final time")


def _seed_check(config, out: Path) -> int:
    """Determinism self-test: run the configuration twice and compare bytes."""
    files = ["snapshots.csv", "trajectory.csv", "report.csv", "manifest.toml"]
    if config.mode == "converge":
        files = ["convergence_table.csv", "manifest.toml"]
    with tempfile.TemporaryDirectory(dir=out) as tmp:
        first, second = Path(tmp) / "a", Path(tmp) / "b"
        code_a = execute(config, first)
        code_b = execute(config, second)
        if code_a != code_b:
            print("seed-check: FAIL (exit codes differ)")
            return 1
        for name in files:
            fa, fb = first / name, second / name
            if not (fa.exists() and fb.exists() and filecmp.cmp(fa, fb, shallow=False)):
                print(f"seed-check: FAIL ({name} differs between runs)")
                return 1
    print("seed-check: PASS (byte-identical outputs)")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="aggdiff",
        description="Deterministic particle runs for 1D aggregation-diffusion "
                    "equations with nonlinear mobility.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one configuration and write outputs")
    _add_common(p_run)
    p_run.add_argument("--seed-check", action="store_true",
                       help="run twice and verify byte-identical outputs")

    p_conv = sub.add_parser("converge", help="self-convergence study over run.n_list")
    _add_common(p_conv)

    p_val = sub.add_parser("validate", help="model admissibility report only")
    p_val.add_argument("--config", required=True)

    p_met = sub.add_parser("metrics", help="recompute diagnostics from stored outputs")
    p_met.add_argument("--out", required=True, help="directory of an existing run")

    args = parser.parse_args(argv)

    try:
        if args.command == "validate":
            config = parse_config(Path(args.config).read_text())
            datum = config.build_datum()
            report = validate(config.build_spec(datum), datum)
            print(report)
            return EXIT_OK if report.ok else EXIT_DIAGNOSTIC_FAIL

        if args.command == "metrics":
            return recompute_metrics(Path(args.out))

        config = _load_config(args)
        out = Path(args.out)
        if args.command == "run":
            if args.seed_check:
                out.mkdir(parents=True, exist_ok=True)
                return _seed_check(config, out)
            if config.mode == "converge":
                return run_converge(config, out)
            return run_single(config, out)
        if args.command == "converge":
            return run_converge(config, out)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except FileNotFoundError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG_ERROR
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
