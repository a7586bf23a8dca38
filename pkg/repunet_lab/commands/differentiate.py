#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

from pathlib import Path

import click
import numpy as np
import pandas as pd

from repunet.errors import DimensionMismatchError
from repunet.files import read_network
from repunet.network import FloatArray, MultiIndex
from repunet.solver import differentiate

from ._helper import library_errors, write_table


def read_points(path: Path, d: int) -> FloatArray:
    """Reads evaluation points from CSV: the columns `x1, ..., xd` if present, otherwise all columns."""
    try:
        frame = pd.read_csv(path)
    except (OSError, ValueError) as exc:
        msg = f"Failed to read points '{path}': {exc}"
        raise click.ClickException(msg) from exc
    columns = [f"x{j + 1}" for j in range(d)]
    if set(columns) <= set(frame.columns):
        frame = frame[columns]
    points = frame.to_numpy(dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != d:  # noqa: PLR2004
        raise DimensionMismatchError(d, points.shape[1] if points.ndim == 2 else 0)  # noqa: PLR2004
    return points


@click.command("differentiate")
@click.option(
    "--model", "-m", "model_path", required=True, type=click.Path(dir_okay=False, path_type=Path), help="Model file."
)
@click.option(
    "--points",
    "-p",
    "points_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="CSV of evaluation points.",
)
@click.option(
    "--alpha",
    "-a",
    "alphas",
    multiple=True,
    required=True,
    help="Multi-index such as '1,0'. Repeat for several derivatives.",
)
@click.option(
    "--out", "-o", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path), help="Output CSV."
)
def differentiate_command(model_path: Path, points_path: Path, alphas: tuple[str, ...], out_path: Path) -> None:
    """Evaluate partial derivatives of a fitted network."""
    with library_errors():
        net = read_network(model_path)
        try:
            parsed = [MultiIndex.parse(text, net.d) for text in alphas]
        except ValueError as exc:
            raise click.BadParameter(str(exc), param_hint="'--alpha'") from exc
        frame = differentiate(net, read_points(points_path, net.d), parsed)

    write_table(out_path, frame)
    click.echo(f"Successfully created '{out_path}'.")
