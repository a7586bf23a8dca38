#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import dataclasses
import time
from pathlib import Path
from typing import Any

import click

from repunet.datagen import NoisyDataset, make_noisy_dataset, make_target
from repunet.files import serialize_dataset
from repunet.quadrature import build_rule
from repunet_lab.models import Command, DatagenConfig

from ._helper import echo_summary, library_errors, load_config, write_atomic, write_report, write_table


def run_datagen(config: DatagenConfig) -> tuple[NoisyDataset, dict[str, Any]]:
    target = make_target(config.target, config.seed)
    dataset = make_noisy_dataset(
        target, build_rule(config.training, target.d), config.delta, config.noise_kind, config.seed
    )
    results = {
        "target": target.describe(),
        "d": dataset.d,
        "size": dataset.size,
        "training_rule": config.training.describe(),
        "noise_kind": dataset.noise_kind.value,
        "delta_nominal": dataset.delta_nominal,
        "delta_realized": dataset.delta_realized,
        "norm_bounds": dataclasses.asdict(target.norm_bounds),
    }
    return dataset, results


@click.command()
@click.option(
    "--config", "-c", "config_path", required=True, type=click.Path(path_type=Path), help="Datagen config file."
)
@click.option(
    "--out", "-o", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path), help="Dataset file."
)
@click.option(
    "--table",
    "table_path",
    type=click.Path(dir_okay=False, path_type=Path),
    help="Also write the samples as CSV with the columns x1, ..., xd, value.",
)
@click.option("--report", "report_path", type=click.Path(dir_okay=False, path_type=Path), help="Run report file.")
def datagen(config_path: Path, out_path: Path, table_path: Path | None, report_path: Path | None) -> None:
    """Sample a target function with calibrated noise."""
    started = time.perf_counter()
    with library_errors():
        config = load_config(config_path, DatagenConfig)
        dataset, results = run_datagen(config)

    write_atomic(out_path, serialize_dataset(dataset))
    if table_path:
        write_table(table_path, dataset.to_frame())
    if report_path:
        write_report(report_path, Command.DATAGEN, config, results, started)

    echo_summary({key: results[key] for key in ("target", "size", "delta_nominal", "delta_realized")})
    click.echo(f"Successfully created '{out_path}'.")
