#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

from enum import StrEnum
from typing import Annotated, Any, Literal, Self

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    PositiveFloat,
    PositiveInt,
    field_validator,
    model_validator,
)

from repunet.analysis.montecarlo import Atom, McMode
from repunet.analysis.rates import SweepConfig
from repunet.analysis.suites import DEFAULT_SUITES, SUITES
from repunet.datagen import NoiseKind, TargetSpec
from repunet.quadrature import QuadratureSpec, RuleKind
from repunet.solver import TikhonovConfig

from .constants import DEFAULT_MC_ATOMS, DEFAULT_MC_GRID, DEFAULT_MC_TRIALS, REPORT_FORMAT_VERSION


class _RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _default_training() -> QuadratureSpec:
    return QuadratureSpec(kind=RuleKind.LATTICE, n=2**12, shifts=1)


class DatagenConfig(_RunConfig):
    """Configuration of `repunet-lab datagen`."""

    target: TargetSpec
    training: QuadratureSpec = Field(default_factory=_default_training)
    """Rule whose nodes become the sample points and whose weights become the training weights."""
    delta: NonNegativeFloat = 0.0
    noise_kind: NoiseKind = NoiseKind.L2_CALIBRATED_FIELD
    seed: int = 0


class FitRunConfig(_RunConfig):
    """Configuration of `repunet-lab fit`."""

    tikhonov: TikhonovConfig


class McRateConfig(_RunConfig):
    """Configuration of `repunet-lab mc-rate`.

    Without explicit `atoms`, `atom_count` random atoms are drawn from the seed.
    """

    mode: McMode = McMode.VARIATION
    k: PositiveInt = 2
    d: PositiveInt = 2
    atoms: Annotated[list[Atom], Field(min_length=1)] | None = None
    atom_count: PositiveInt = DEFAULT_MC_ATOMS
    n_grid: Annotated[list[PositiveInt], Field(min_length=1)] = list(DEFAULT_MC_GRID)
    trials: Annotated[int, Field(ge=2)] = DEFAULT_MC_TRIALS
    quadrature: QuadratureSpec | None = None
    """Rule for the `L^2` inner products; defaults depend on `d`."""
    seed: int = 0

    @model_validator(mode="after")
    def _check_atoms(self) -> Self:
        for idx, atom in enumerate(self.atoms or []):
            if len(atom.w) != self.d:
                msg = f"atoms.{idx}.w has length {len(atom.w)}, expected d={self.d}"
                raise ValueError(msg)
        return self


class RatesConfig(_RunConfig):
    """Configuration of `repunet-lab rates`."""

    sweep: SweepConfig


class CheckConfig(_RunConfig):
    """Configuration of `repunet-lab check`."""

    suites: list[str] = list(DEFAULT_SUITES)
    seed: int = 0
    scale: PositiveFloat = 1.0
    """Factor applied to the number of random cases of every suite."""

    @field_validator("suites")
    @classmethod
    def _known_suites(cls, value: list[str]) -> list[str]:
        unknown = [name for name in value if name not in SUITES]
        if unknown:
            msg = f"unknown suites {unknown}, available: {list(SUITES)}"
            raise ValueError(msg)
        return value


class Command(StrEnum):
    DATAGEN = "datagen"
    FIT = "fit"
    MC_RATE = "mc-rate"
    RATES = "rates"
    CHECK = "check"


class RunReport(BaseModel):
    """Report of one run, with the resolved configuration it was produced from.

    Replaying `config` (and `inputs`) reproduces `results`; only `wall_time` differs between runs.
    """

    model_config = ConfigDict(extra="forbid")

    format_version: Literal[1] = REPORT_FORMAT_VERSION
    command: Command
    config: dict[str, Any]
    inputs: dict[str, str] = {}
    """Input files by role, as given on the command line."""
    results: dict[str, Any]
    wall_time: float
