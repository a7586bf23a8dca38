#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import math
import tempfile
import time
from collections.abc import Callable, Iterator, Mapping
from contextlib import contextmanager, suppress
from pathlib import Path
from typing import Any, TypeVar

import click
import numpy as np
import pandas as pd
import yaml
from pydantic import BaseModel, ValidationError

from repunet._jobs import default_jobs
from repunet.errors import ConfigError, DivergenceError, RepunetError
from repunet_lab.models import Command, RunReport

_M = TypeVar("_M", bound=BaseModel)


class NumericalFailure(click.ClickException):
    """A fit diverged; exits with code 2."""

    exit_code = 2


def _format_validation_error(path: Path, exc: ValidationError) -> str:
    problems = []
    for error in exc.errors():
        key = ".".join(str(part) for part in error["loc"]) or "<root>"
        problems.append(f"  {key}: {error['msg']}")
    return f"Invalid config '{path}':\n" + "\n".join(problems)


def load_config(path: Path, model: type[_M]) -> _M:
    """Reads a YAML (or JSON) config file into `model`.

    Raises:
        ConfigError: If the file is missing or unreadable, is not valid YAML, or does not match `model`. The message
            names the file and the offending keys.
    """
    try:
        with path.open() as file:
            raw = yaml.safe_load(file)
    except FileNotFoundError as exc:
        msg = f"The config '{path}' does not exist."
        raise ConfigError(msg) from exc
    except OSError as exc:
        msg = f"Failed to read config '{path}': {exc}"
        raise ConfigError(msg) from exc
    except yaml.YAMLError as exc:
        msg = f"Failed to parse config '{path}': {exc}"
        raise ConfigError(msg) from exc

    try:
        return model.model_validate({} if raw is None else raw)
    except ValidationError as exc:
        raise ConfigError(_format_validation_error(path, exc)) from exc


@contextmanager
def library_errors() -> Iterator[None]:
    """Converts library exceptions into click exceptions with the matching exit codes."""
    try:
        yield
    except DivergenceError as exc:
        raise NumericalFailure(str(exc)) from exc
    except RepunetError as exc:
        raise click.ClickException(str(exc)) from exc


def write_atomic(path: Path, text: str) -> None:
    """Writes `text` to a temporary file next to `path` and renames it into place."""
    path.parent.mkdir(parents=True, exist_ok=True)
    # Use temp file, otherwise a failed write could leave a truncated `path` behind.
    temp_file = tempfile.NamedTemporaryFile("w", dir=path.parent, prefix=f".{path.name}.", delete=False)  # noqa: SIM115
    temp_file_path = Path(temp_file.name)
    try:
        try:
            temp_file.write(text)
        finally:
            temp_file.close()
        temp_file_path.replace(path)
    finally:
        with suppress(FileNotFoundError):
            temp_file_path.unlink()


def write_table(path: Path, frame: pd.DataFrame) -> None:
    write_atomic(path, frame.to_csv(index=False))


def json_safe(value: Any) -> Any:
    """Turns numpy scalars and arrays into plain Python values and non-finite floats into `None`."""
    if isinstance(value, Mapping):
        return {str(key): json_safe(item) for key, item in value.items()}
    if isinstance(value, list | tuple | np.ndarray):
        return [json_safe(item) for item in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_report(
    path: Path,
    command: Command,
    config: BaseModel,
    results: Mapping[str, Any],
    started: float,
    inputs: Mapping[str, str] | None = None,
) -> RunReport:
    report = RunReport(
        command=command,
        config=config.model_dump(mode="json"),
        inputs=dict(inputs or {}),
        results=json_safe(results),
        wall_time=time.perf_counter() - started,
    )
    write_atomic(path, report.model_dump_json(indent=2))
    return report


def jobs_option(func: Callable[..., Any]) -> Callable[..., Any]:
    return click.option(
        "--jobs",
        "-j",
        type=click.IntRange(min=1),
        default=default_jobs,
        show_default="number of CPUs",
        help="Number of parallel jobs.",
    )(func)


def echo_summary(lines: Mapping[str, Any]) -> None:
    """Prints `key: value` lines, the structured-text summary of a run."""
    for key, value in lines.items():
        click.echo(f"{key}: {value}")


def format_flag(passed: bool) -> str:  # noqa: FBT001
    return "PASS" if passed else "FAIL"
