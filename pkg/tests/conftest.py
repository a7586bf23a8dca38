#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

from collections.abc import Callable
from pathlib import Path
from typing import Any

import pytest
import yaml


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[[str, dict[str, Any]], Path]:
    """Returns a function that dumps a config mapping as YAML into the temporary directory."""

    def write(name: str, config: dict[str, Any]) -> Path:
        path = tmp_path / name
        with path.open("w") as file:
            yaml.dump(config, file)
        return path

    return write
