#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import logging
import shutil
import sys

import click

from repunet import __version__
from repunet.files import FORMAT_VERSION
from repunet_lab.commands.check import check
from repunet_lab.commands.constants import constants
from repunet_lab.commands.datagen import datagen
from repunet_lab.commands.differentiate import differentiate_command
from repunet_lab.commands.fit import fit_command
from repunet_lab.commands.mc_rate import mc_rate
from repunet_lab.commands.rates import rates
from repunet_lab.commands.replay import replay
from repunet_lab.constants import REPORT_FORMAT_VERSION

# Contrary to click's docs, there's no autodetection of the terminal width (pallets/click#2253)
terminal_width = shutil.get_terminal_size()[0]


@click.group(context_settings={"help_option_names": ["-h", "--help"], "terminal_width": terminal_width})
@click.version_option(
    __version__,
    prog_name="repunet-lab",
    message=f"%(prog)s %(version)s (model format {FORMAT_VERSION}, report format {REPORT_FORMAT_VERSION})",
)
@click.option("-v", "--verbose", is_flag=True, show_default=True, default=False, help="Use log level DEBUG.")
def cli(*, verbose: bool) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO, stream=sys.stderr)


cli.add_command(datagen)
cli.add_command(fit_command)
cli.add_command(differentiate_command)
cli.add_command(constants)
cli.add_command(mc_rate)
cli.add_command(rates)
cli.add_command(check)
cli.add_command(replay)

if __name__ == "__main__":
    cli()
