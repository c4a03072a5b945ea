"""Generate small simulation outputs through the primary CLI once per session.

The figure package consumes the simulator only through its command line and
CSV files, so these fixtures shell out to `aggdiff run` on the shipped
configurations at reduced size.
"""
from __future__ import annotations

import subprocess
import sys
from pathlib import Path

import pytest

CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"

RUNS = {
    "eps1": "fig_confronto_eps1.toml",
    "eps0p1": "fig_confronto_eps0p1.toml",
    "eps0p05": "fig_confronto_eps0p05.toml",
    "novacuum": "fig_novacuum.toml",
    "strong_const": "fig_strong_const.toml",
    "strong_twostep": "fig_strong_twostep.toml",
    "sine_pm": "fig_confronto3_pm.toml",
    "sine_tp": "fig_confronto3_tp.toml",
    "sine_sd": "fig_confronto3_sd.toml",
}


@pytest.fixture(scope="session")
def run_outputs(tmp_path_factory) -> dict[str, Path]:
    root = tmp_path_factory.mktemp("runs")
    outputs = {}
    for name, config in RUNS.items():
        out = root / name
        cmd = [sys.executable, "-m", "aggdiff.cli", "run",
               "--config", str(CONFIG_DIR / config), "--out", str(out),
               "--n", "40", "--t-final", "0.25"]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, f"{name}: {proc.stderr}"
        outputs[name] = out
    return outputs
