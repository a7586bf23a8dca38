#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import dataclasses
import time
from pathlib import Path
from typing import Any

import click
import pandas as pd

from repunet.files import NetworkFile, read_dataset, serialize_network
from repunet.solver import FitReport, fit
from repunet_lab.models import Command, FitRunConfig

from ._helper import echo_summary, jobs_option, library_errors, load_config, write_atomic, write_report, write_table


def run_fit(config: FitRunConfig, data_path: Path, jobs: int) -> tuple[FitReport, dict[str, Any]]:
    report = fit(read_dataset(data_path), config.tikhonov, jobs=jobs)
    results = {
        "objective": report.objective,
        "fidelity": report.fidelity,
        "penalty": report.penalty,
        "lambda": report.lam,
        "iterations": report.iterations,
        "restart": report.restart,
        "epsilon_achieved": report.epsilon_achieved,
        "restart_objectives": list(report.restart_objectives),
        "grid": [dataclasses.asdict(point) for point in report.grid],
        "model": NetworkFile.from_network(report.network).model_dump(mode="json"),
    }
    return report, results


@click.command("fit")
@click.option(
    "--data", "-d", "data_path", required=True, type=click.Path(dir_okay=False, path_type=Path), help="Dataset file."
)
@click.option(
    "--config", "-c", "config_path", required=True, type=click.Path(path_type=Path), help="Fit config file."
)
@click.option(
    "--out", "-o", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path), help="Model file."
)
@click.option("--report", "report_path", type=click.Path(dir_okay=False, path_type=Path), help="Run report file.")
@click.option(
    "--trace",
    "trace_path",
    type=click.Path(dir_okay=False, path_type=Path),
    help="CSV of the best objective per iteration of the chosen restart.",
)
@jobs_option
def fit_command(
    data_path: Path,
    config_path: Path,
    out_path: Path,
    report_path: Path | None,
    trace_path: Path | None,
    jobs: int,
) -> None:
    """Fit a regularised network to a dataset."""
    started = time.perf_counter()
    with library_errors():
        config = load_config(config_path, FitRunConfig)
        report, results = run_fit(config, data_path, jobs)

    write_atomic(out_path, serialize_network(report.network))
    if trace_path:
        write_table(trace_path, pd.DataFrame({"iteration": range(report.trace.size), "objective": report.trace}))
    if report_path:
        write_report(report_path, Command.FIT, config, results, started, {"data": str(data_path)})

    echo_summary({key: results[key] for key in ("objective", "fidelity", "penalty", "lambda", "restart")})
    click.echo(f"Successfully created '{out_path}'.")
