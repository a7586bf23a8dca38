#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import time
from pathlib import Path
from typing import Any

import click

from repunet.analysis.montecarlo import McRateReport, mc_construction, random_atoms
from repunet.quadrature import QuadratureSpec, build_rule
from repunet_lab.models import Command, McRateConfig

from ._helper import echo_summary, format_flag, library_errors, load_config, write_report, write_table


def run_mc_rate(config: McRateConfig) -> tuple[McRateReport, dict[str, Any]]:
    atoms = config.atoms or random_atoms(config.atom_count, config.d, config.seed)
    rule = build_rule(config.quadrature or QuadratureSpec.default_for(config.d, config.seed), config.d)
    report = mc_construction(atoms, config.n_grid, config.trials, rule, config.mode, config.k, config.seed)
    results = {
        "mode": report.mode.value,
        "atoms": [atom.model_dump() for atom in atoms],
        "measure_norm": report.measure_norm,
        "slope": report.slope.slope if report.slope else None,
        "intercept": report.slope.intercept if report.slope else None,
        "passed": report.passed,
        "points": report.to_frame().to_dict(orient="records"),
    }
    return report, results


@click.command("mc-rate")
@click.option(
    "--config", "-c", "config_path", required=True, type=click.Path(path_type=Path), help="Monte Carlo config file."
)
@click.option(
    "--out", "-o", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path), help="Output CSV."
)
@click.option("--report", "report_path", type=click.Path(dir_okay=False, path_type=Path), help="Run report file.")
def mc_rate(config_path: Path, out_path: Path, report_path: Path | None) -> None:
    """Measure the Monte Carlo approximation rate of a finite-atom target."""
    started = time.perf_counter()
    with library_errors():
        config = load_config(config_path, McRateConfig)
        report, results = run_mc_rate(config)

    write_table(out_path, report.to_frame())
    if report_path:
        write_report(report_path, Command.MC_RATE, config, results, started)

    echo_summary(
        {
            "mode": report.mode.value,
            "measure_norm": report.measure_norm,
            "slope": results["slope"],
            "below_ceiling": format_flag(report.passed),
        }
    )
