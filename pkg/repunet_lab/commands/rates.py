#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import time
from pathlib import Path
from typing import Any

import click

from repunet.analysis.rates import RateReport, rate_sweep
from repunet_lab.models import Command, RatesConfig

from ._helper import jobs_option, library_errors, load_config, write_report, write_table


def run_rates(config: RatesConfig, jobs: int) -> tuple[RateReport, dict[str, Any]]:
    report = rate_sweep(config.sweep, jobs=jobs)
    results = {"summary": report.summary(), "points": report.to_frame().to_dict(orient="records")}
    return report, results


@click.command("rates")
@click.option(
    "--config", "-c", "config_path", required=True, type=click.Path(path_type=Path), help="Sweep config file."
)
@click.option(
    "--out", "-o", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path), help="Output CSV."
)
@click.option("--report", "report_path", type=click.Path(dir_okay=False, path_type=Path), help="Run report file.")
@jobs_option
def rates(config_path: Path, out_path: Path, report_path: Path | None, jobs: int) -> None:
    """Sweep the noise level, neuron budget or dimension and fit convergence rates."""
    started = time.perf_counter()
    with library_errors():
        config = load_config(config_path, RatesConfig)
        report, results = run_rates(config, jobs)

    write_table(out_path, report.to_frame())
    if report_path:
        write_report(report_path, Command.RATES, config, results, started)

    summary = results["summary"]
    click.echo(f"axis: {summary['axis']}, penalty: {summary['penalty']}, failures: {summary['failures']}")
    for order in summary["orders"]:
        slope = "n/a" if order["slope"] is None else f"{order['slope']:.3f}"
        theory = "n/a" if order["theory_exponent"] is None else f"{order['theory_exponent']:.3f}"
        spread = order["bound_ratio_spread"]
        click.echo(f"m={order['m']}: slope {slope} (theory {theory}), bound ratio spread {spread:.3g}")
