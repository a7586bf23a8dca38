#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

from .constants import barron_embedding_constant, constants_table, md_lower_bound_probe, variation_embedding_constant
from .embedding import check_embedding, dictionary_bound_check, interpolation_check, norm_relation_check, random_corpus
from .montecarlo import Atom, McMode, McRateReport, mc_construction, random_atoms
from .rates import RateReport, SweepAxis, SweepConfig, fit_slope, rate_sweep
from .suites import DEFAULT_SUITES, SUITES, SuiteResult, run_suites

__all__ = [
    "DEFAULT_SUITES",
    "SUITES",
    "Atom",
    "McMode",
    "McRateReport",
    "RateReport",
    "SuiteResult",
    "SweepAxis",
    "SweepConfig",
    "barron_embedding_constant",
    "check_embedding",
    "constants_table",
    "dictionary_bound_check",
    "fit_slope",
    "interpolation_check",
    "mc_construction",
    "md_lower_bound_probe",
    "norm_relation_check",
    "random_atoms",
    "rate_sweep",
    "run_suites",
    "variation_embedding_constant",
]
