#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import logging
import time
from pathlib import Path
from typing import Any

import click
from pydantic import BaseModel, ValidationError

from repunet.errors import ConfigError
from repunet_lab.models import (
    CheckConfig,
    Command,
    DatagenConfig,
    FitRunConfig,
    McRateConfig,
    RatesConfig,
    RunReport,
)

from ._helper import jobs_option, library_errors, write_report
from .check import run_check
from .datagen import run_datagen
from .fit import run_fit
from .mc_rate import run_mc_rate
from .rates import run_rates

log = logging.getLogger("repunet-lab:replay")


def read_report(path: Path) -> RunReport:
    try:
        return RunReport.model_validate_json(path.read_bytes())
    except OSError as exc:
        msg = f"Failed to read report '{path}': {exc}"
        raise ConfigError(msg) from exc
    except ValidationError as exc:
        msg = f"'{path}' is not a run report:\n{exc}"
        raise ConfigError(msg) from exc


def _validated(model: type[BaseModel], report: RunReport) -> Any:
    try:
        return model.model_validate(report.config)
    except ValidationError as exc:
        msg = f"The embedded config of the {report.command} report is invalid:\n{exc}"
        raise ConfigError(msg) from exc


def replay_report(report: RunReport, jobs: int) -> tuple[BaseModel, dict[str, Any]]:
    """Re-runs the embedded configuration of `report` and returns it with the new results."""
    match report.command:
        case Command.DATAGEN:
            config = _validated(DatagenConfig, report)
            return config, run_datagen(config)[1]
        case Command.FIT:
            if "data" not in report.inputs:
                msg = "The fit report does not record its dataset"
                raise ConfigError(msg)
            config = _validated(FitRunConfig, report)
            return config, run_fit(config, Path(report.inputs["data"]), jobs)[1]
        case Command.MC_RATE:
            config = _validated(McRateConfig, report)
            return config, run_mc_rate(config)[1]
        case Command.RATES:
            config = _validated(RatesConfig, report)
            return config, run_rates(config, jobs)[1]
        case Command.CHECK:
            config = _validated(CheckConfig, report)
            return config, run_check(config, jobs)[1]


@click.command("replay")
@click.argument("report_path", metavar="REPORT", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option(
    "--out", "-o", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path), help="New report file."
)
@jobs_option
def replay(report_path: Path, out_path: Path, jobs: int) -> None:
    """Re-run the configuration embedded in REPORT and write a fresh report."""
    started = time.perf_counter()
    with library_errors():
        report = read_report(report_path)
        log.info("Replaying %s report '%s'", report.command, report_path)
        config, results = replay_report(report, jobs)

    fresh = write_report(out_path, report.command, config, results, started, report.inputs)
    identical = fresh.model_dump(exclude={"wall_time"}) == report.model_dump(exclude={"wall_time"})
    click.echo(f"Results {'match' if identical else 'differ from'} the original report.")
    click.echo(f"Successfully created '{out_path}'.")
