#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

REPORT_FORMAT_VERSION = 1

DEFAULT_MC_GRID = (16, 32, 64, 128, 256, 512, 1024)
DEFAULT_MC_TRIALS = 200
DEFAULT_MC_ATOMS = 10
