#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import time
from pathlib import Path
from typing import Any

import click
import pandas as pd

from repunet.analysis.suites import SUITES, SuiteResult, run_suites
from repunet_lab.models import CheckConfig, Command

from ._helper import format_flag, jobs_option, library_errors, load_config, write_report, write_table


def run_check(config: CheckConfig, jobs: int) -> tuple[list[SuiteResult], dict[str, Any]]:
    suites = run_suites(config.suites, config.seed, config.scale, jobs)
    results = {
        "passed": all(suite.passed for suite in suites),
        "suites": [
            {"name": s.name, "passed": s.passed, "cases": s.cases, "violations": s.violations, "detail": s.detail}
            for s in suites
        ],
    }
    return suites, results


@click.command("check")
@click.option("--config", "-c", "config_path", type=click.Path(path_type=Path), help="Check config file.")
@click.option(
    "--suite",
    "-s",
    "suite_names",
    multiple=True,
    type=click.Choice(list(SUITES)),
    help="Suite to run, repeatable. Overrides the config. [default: all but montecarlo]",
)
@click.option("--seed", type=int, help="Seed of the random cases. Overrides the config.")
@click.option("--scale", type=click.FloatRange(min=0, min_open=True), help="Factor on the number of random cases.")
@click.option("--out", "-o", "out_path", type=click.Path(dir_okay=False, path_type=Path), help="Output CSV.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False, path_type=Path), help="Run report file.")
@jobs_option
def check(
    config_path: Path | None,
    suite_names: tuple[str, ...],
    seed: int | None,
    scale: float | None,
    out_path: Path | None,
    report_path: Path | None,
    jobs: int,
) -> None:
    """Run the randomised property suites.

    Exits with code 1 if any suite reports violations.
    """
    started = time.perf_counter()
    with library_errors():
        config = load_config(config_path, CheckConfig) if config_path else CheckConfig()
        overrides: dict[str, Any] = {}
        if suite_names:
            overrides["suites"] = list(suite_names)
        if seed is not None:
            overrides["seed"] = seed
        if scale is not None:
            overrides["scale"] = scale
        config = config.model_copy(update=overrides)
        suites, results = run_check(config, jobs)

    frame = pd.DataFrame(
        {
            "suite": [s.name for s in suites],
            "cases": [s.cases for s in suites],
            "violations": [s.violations for s in suites],
            "passed": [s.passed for s in suites],
            "seconds": [s.elapsed for s in suites],
        }
    )
    if out_path:
        write_table(out_path, frame)
    if report_path:
        write_report(report_path, Command.CHECK, config, results, started)

    for suite in suites:
        click.echo(
            f"{suite.name}: {format_flag(suite.passed)} ({suite.cases} cases, {suite.violations} violations, "
            f"{suite.elapsed:.1f}s)"
        )
    if not results["passed"]:
        msg = "Some property suites reported violations."
        raise click.ClickException(msg)
