#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

from pathlib import Path

import click

from repunet.analysis.constants import constants_table

from ._helper import library_errors, write_table


@click.command("constants")
@click.option("--d", "d", required=True, type=click.IntRange(min=1), help="Input dimension.")
@click.option("--k", "k", required=True, type=click.IntRange(min=1), help="Activation power.")
@click.option(
    "--m", "orders", multiple=True, type=click.IntRange(min=0), help="Sobolev order, repeatable. [default: 0..k]"
)
@click.option("--out", "-o", "out_path", type=click.Path(dir_okay=False, path_type=Path), help="Also write CSV.")
def constants(d: int, k: int, orders: tuple[int, ...], out_path: Path | None) -> None:
    """Print the embedding constants C(d, m, k) and c~(d, m, k) and the M(d) probe."""
    with library_errors():
        frame = constants_table(d, k, list(orders) or list(range(k + 1)))

    click.echo(frame.to_string(index=False))
    if out_path:
        write_table(out_path, frame)
