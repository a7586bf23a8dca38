#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import json
from collections.abc import Callable
from pathlib import Path
from typing import Any

import pandas as pd
import pytest
from click.testing import CliRunner

from repunet_lab.commands.mc_rate import mc_rate

MC_CONFIG: dict[str, Any] = {
    "mode": "barron",
    "atom_count": 6,
    "n_grid": [16, 64, 256],
    "trials": 40,
    "quadrature": {"q": 8},
    "seed": 3,
}


def test_mc_rate(runner: CliRunner, cwd: Path, write_config: Callable[..., Path]) -> None:
    config = write_config("mc.yaml", MC_CONFIG)

    result = runner.invoke(mc_rate, ["-c", str(config), "-o", "mc.csv", "--report", "report.json"])

    assert result.exit_code == 0, result.output
    assert "mode: barron" in result.output
    assert "below_ceiling: PASS" in result.output
    frame = pd.read_csv(cwd / "mc.csv")
    assert frame["n"].tolist() == [16, 64, 256]
    assert frame["mean_sq_error"].iloc[-1] < frame["mean_sq_error"].iloc[0]
    report = json.loads((cwd / "report.json").read_text())
    assert report["command"] == "mc-rate"
    assert len(report["results"]["atoms"]) == 6
    assert report["results"]["slope"] < 0


def test_mc_rate_with_single_atom(runner: CliRunner, cwd: Path, write_config: Callable[..., Path]) -> None:
    config = write_config(
        "mc.yaml",
        {"atoms": [{"p": 1.0, "a": -0.5, "w": [0.6, 0.8], "b": 0.1}], "n_grid": [4, 16], "quadrature": {"q": 6}},
    )

    result = runner.invoke(mc_rate, ["-c", str(config), "-o", "mc.csv"])

    assert result.exit_code == 0, result.output
    assert "measure_norm: 0.5" in result.output
    assert "slope: None" in result.output
    assert "below_ceiling: PASS" in result.output
    assert pd.read_csv(cwd / "mc.csv")["mean_sq_error"].tolist() == [0.0, 0.0]


@pytest.mark.parametrize(
    ("changes", "message"),
    [
        ({"trials": 1}, "trials: "),
        ({"atoms": [{"p": 1.0, "a": 1.0, "w": [1.0], "b": 0.0}]}, "expected d=2"),
        ({"mode": "sobolev"}, "mode: "),
    ],
)
def test_mc_rate_with_invalid_config(
    runner: CliRunner, write_config: Callable[..., Path], changes: dict[str, Any], message: str
) -> None:
    config = write_config("mc.yaml", {**MC_CONFIG, **changes})

    result = runner.invoke(mc_rate, ["-c", str(config), "-o", "mc.csv"])

    assert result.exit_code == 1
    assert message in result.output
