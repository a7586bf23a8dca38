#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import os
from collections.abc import Iterator
from pathlib import Path

import pytest
from click.testing import CliRunner


@pytest.fixture
def isolated_runner(tmp_path: Path) -> Iterator[tuple[CliRunner, Path]]:
    """Provides Click's `CliRunner` inside the temporary directory.

    Yields: A tuple containing the `CliRunner` instance `runner` and the path to the temporary directory `path`.
    """
    runner = CliRunner()
    cwd_orig = Path.cwd()
    os.chdir(tmp_path)
    try:
        yield runner, tmp_path
    finally:
        os.chdir(cwd_orig)


@pytest.fixture
def runner(isolated_runner: tuple[CliRunner, Path]) -> CliRunner:  # noqa: FURB118
    return isolated_runner[0]


@pytest.fixture
def cwd(isolated_runner: tuple[CliRunner, Path]) -> Path:  # noqa: FURB118
    return isolated_runner[1]
