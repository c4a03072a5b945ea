#!/usr/bin/env python3
"""Drive the CLI over every shipped figure configuration.

Full-size runs take a few minutes each at N = 300; pass --quick to shrink
them for a smoke pass.  Outputs land in one directory per configuration,
ready for the figure scripts in figures/.
"""
import argparse
import subprocess
import sys
from pathlib import Path

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/runs", help="output tree")
    parser.add_argument("--quick", action="store_true",
                        help="N=60, T=0.25 instead of the full sizes")
    parser.add_argument("--only", default="fig_",
                        help="config filename prefix filter")
    args = parser.parse_args()

    out_root = Path(args.out)
    failures = []
    for config in sorted(CONFIGS.glob("*.toml")):
        if not config.stem.startswith(args.only):
            continue
        run_dir = out_root / config.stem
        cmd = [sys.executable, "-m", "aggdiff.cli", "run",
               "--config", str(config), "--out", str(run_dir)]
        if args.quick:
            cmd += ["--n", "60", "--t-final", "0.25"]
        print("==>", config.stem)
        code = subprocess.call(cmd)
        if code not in (0, 1):  # 1 = diagnostics failed, outputs still usable
            failures.append((config.stem, code))
    for name, code in failures:
        print(f"FAILED: {name} (exit {code})", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
