#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import math
from pathlib import Path

import pandas as pd
import pytest
from click.testing import CliRunner

from repunet_lab.commands.constants import constants


def test_constants_prints_table(runner: CliRunner) -> None:
    result = runner.invoke(constants, ["--d", "2", "--k", "2"])

    assert result.exit_code == 0, result.output
    header = result.output.splitlines()[0].split()
    assert header == ["d", "k", "m", "barron_constant", "variation_constant", "md_probe"]
    assert "3.000000" in result.output
    assert "8.000000" in result.output
    assert len(result.output.splitlines()) == 4


def test_constants_writes_csv(runner: CliRunner, cwd: Path) -> None:
    result = runner.invoke(constants, ["--d", "2", "--k", "2", "--m", "2", "--m", "0", "-o", "constants.csv"])

    assert result.exit_code == 0, result.output
    frame = pd.read_csv(cwd / "constants.csv")
    assert frame["m"].tolist() == [2, 0]
    assert frame["barron_constant"].tolist() == pytest.approx([math.sqrt(21), 1.0])
    assert frame["variation_constant"].tolist() == pytest.approx([math.sqrt(140), 8.0])
    assert frame["md_probe"].nunique() == 1


def test_constants_without_probe_in_one_dimension(runner: CliRunner, cwd: Path) -> None:
    result = runner.invoke(constants, ["--d", "1", "--k", "1", "-o", "constants.csv"])

    assert result.exit_code == 0, result.output
    frame = pd.read_csv(cwd / "constants.csv")
    assert frame["barron_constant"].tolist() == pytest.approx([1.0, math.sqrt(2)])
    assert frame["md_probe"].isna().all()


def test_constants_with_order_above_k(runner: CliRunner) -> None:
    result = runner.invoke(constants, ["--d", "2", "--k", "2", "--m", "3"])

    assert result.exit_code == 1
    assert "m must satisfy 0 <= m <= k" in result.output


def test_constants_with_invalid_dimension(runner: CliRunner) -> None:
    result = runner.invoke(constants, ["--d", "0", "--k", "2"])

    assert result.exit_code == 2
    assert "Invalid value for '--d'" in result.output
