"""Convergence-rate sweeps of the regularisation schemes.

A sweep varies one of the noise level `delta`, the neuron budget `n` or the input dimension `d`, fits a network at
every grid point and measures its `H^m` error against the exact target for `m = 0..m_max`. The errors are compared
with the envelope `(delta + n^(-1/2))^((k - m)/k)` (`(delta + sqrt(epsilon))^((k - m)/k)` for `radon_bv`) and
log-log slopes are fitted per order.
"""

#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum
from typing import Annotated, Any, Self

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveFloat, model_validator
from scipy import stats

from repunet._jobs import run_jobs
from repunet.datagen import NeuronSpec, NoiseKind, TargetKind, TargetSpec, make_noisy_dataset, make_target
from repunet.errors import DivergenceError
from repunet.network import FloatArray
from repunet.penalties import PenaltyKind
from repunet.quadrature import QuadratureSpec, RuleKind, build_rule, sobolev_profile
from repunet.solver import TikhonovConfig, default_barron_constant, fit

log = logging.getLogger("repunet:rates")


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    stderr: float
    """Standard error of the slope; zero for two points."""


def fit_slope(x: ArrayLike, y: ArrayLike) -> SlopeFit | None:
    """Least-squares line through `(log x, log y)`, ignoring non-positive or non-finite pairs.

    Returns `None` if fewer than two usable points remain.

    >>> round(fit_slope([1, 10, 100], [1.0, 0.1, 0.01]).slope, 12)
    -1.0
    """
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    usable = np.isfinite(xs) & np.isfinite(ys) & (xs > 0) & (ys > 0)
    if np.count_nonzero(usable) < 2 or np.unique(xs[usable]).size < 2:  # noqa: PLR2004
        return None
    result = stats.linregress(np.log(xs[usable]), np.log(ys[usable]))
    return SlopeFit(float(result.slope), float(result.intercept), float(result.stderr))


def rate_envelope(kind: PenaltyKind, delta: float, n: int, k: int, m: int, epsilon: float = 0.0) -> float:
    """Error envelope of order `m`, without the dimension-dependent factor."""
    base = delta + math.sqrt(epsilon) if kind is PenaltyKind.RADON_BV else delta + n**-0.5
    return base ** ((k - m) / k)


def l2_bound_barron(delta: float, n: int, norm: float, constant: float) -> float:
    """`3 (delta + C(k) n^(-1/2) ||f||)`, the `L^2` error bound of the Barron scheme at its balanced lambda."""
    return 3.0 * (delta + constant * norm / math.sqrt(n))


def l2_bound_variation(delta: float, n: int, norm: float, k: int, d: int) -> float:
    """`3 (delta + 2^k d^(k/2) n^(-1/2) ||f||)`, the `L^2` error bound of the variation scheme."""
    return 3.0 * (delta + 2.0**k * d ** (k / 2) * norm / math.sqrt(n))


class SweepAxis(StrEnum):
    DELTA = "delta"
    N = "n"
    D = "d"


def _default_training() -> QuadratureSpec:
    return QuadratureSpec(kind=RuleKind.LATTICE, n=2**12, shifts=1)


class SweepConfig(BaseModel):
    """Configuration of a rate sweep (`sweep.*` config keys)."""

    model_config = ConfigDict(extra="forbid")

    axis: SweepAxis
    grid: Annotated[list[PositiveFloat], Field(min_length=1)]
    tikhonov: TikhonovConfig
    target: TargetSpec = TargetSpec()
    noise_kind: NoiseKind = NoiseKind.L2_CALIBRATED_FIELD
    training: QuadratureSpec = Field(default_factory=_default_training)
    """Rule whose nodes and weights form the training set."""
    evaluation: QuadratureSpec | None = None
    """Rule used to measure errors; defaults depend on the dimension and never coincide with the training rule."""
    m_max: NonNegativeInt | None = None
    """Highest measured derivative order; defaults to `min(k, 2)`."""
    seed: int = 0

    @model_validator(mode="after")
    def _check_grid(self) -> Self:
        if self.axis is not SweepAxis.DELTA and any(v != int(v) for v in self.grid):
            msg = f"grid values of the '{self.axis}' axis must be integers"
            raise ValueError(msg)
        if self.m_max is not None and self.m_max > self.tikhonov.k:
            msg = f"m_max={self.m_max} exceeds k={self.tikhonov.k}"
            raise ValueError(msg)
        return self

    @property
    def orders(self) -> int:
        """Highest measured derivative order."""
        return self.m_max if self.m_max is not None else min(self.tikhonov.k, 2)


@dataclass(frozen=True)
class RatePoint:
    value: float
    """Axis value of this grid point."""
    d: int
    n: int
    delta: float
    errors: FloatArray
    """`H^m` errors for `m = 0..m_max`, NaN if the fit failed."""
    error_bars: FloatArray
    envelopes: FloatArray
    lam: float = math.nan
    fidelity: float = math.nan
    penalty: float = math.nan
    norm_hint: float = math.nan
    epsilon_achieved: float = math.nan
    l2_bound: float = math.nan
    failure: str | None = None

    @property
    def bound_ratios(self) -> FloatArray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.envelopes > 0, self.errors / self.envelopes, np.nan)

    @property
    def penalty_ratio(self) -> float:
        return self.penalty / self.norm_hint if self.norm_hint > 0 else math.nan


@dataclass(frozen=True)
class RateReport:
    axis: SweepAxis
    penalty_kind: PenaltyKind
    k: int
    m_max: int
    points: tuple[RatePoint, ...]
    slopes: tuple[SlopeFit | None, ...]
    """Log-log slope of the error of every order against the axis."""

    @property
    def grid(self) -> list[float]:
        return [p.value for p in self.points]

    @property
    def theory_exponents(self) -> tuple[float | None, ...]:
        """Predicted slope per order: `(k - m)/k` against `delta`, half that with opposite sign against `n`."""
        match self.axis:
            case SweepAxis.DELTA:
                return tuple((self.k - m) / self.k for m in range(self.m_max + 1))
            case SweepAxis.N:
                return tuple(-(self.k - m) / (2 * self.k) for m in range(self.m_max + 1))
            case SweepAxis.D:
                return tuple(None for _ in range(self.m_max + 1))

    @property
    def failures(self) -> int:
        return sum(p.failure is not None for p in self.points)

    def bound_ratio_spread(self, m: int) -> float:
        """Largest over smallest bound ratio of order `m` across successful points."""
        ratios = np.array([p.bound_ratios[m] for p in self.points if p.failure is None])
        ratios = ratios[np.isfinite(ratios) & (ratios > 0)]
        return float(ratios.max() / ratios.min()) if ratios.size else math.nan

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for p in self.points:
            row: dict[str, Any] = {
                self.axis.value: p.value,
                "d": p.d,
                "n": p.n,
                "delta": p.delta,
                "lambda": p.lam,
                "fidelity": p.fidelity,
                "penalty": p.penalty,
                "norm_hint": p.norm_hint,
                "penalty_ratio": p.penalty_ratio,
                "epsilon_achieved": p.epsilon_achieved,
                "l2_bound_ratio": p.errors[0] / p.l2_bound if p.l2_bound > 0 else math.nan,
            }
            for m in range(self.m_max + 1):
                row[f"error_m{m}"] = p.errors[m]
                row[f"error_bar_m{m}"] = p.error_bars[m]
                row[f"bound_ratio_m{m}"] = p.bound_ratios[m]
            row["failure"] = p.failure or ""
            rows.append(row)
        return pd.DataFrame(rows)

    def summary(self) -> dict[str, Any]:
        orders = []
        for m, (fit_, theory) in enumerate(zip(self.slopes, self.theory_exponents, strict=True)):
            orders.append(
                {
                    "m": m,
                    "slope": fit_.slope if fit_ else None,
                    "intercept": fit_.intercept if fit_ else None,
                    "theory_exponent": theory,
                    "bound_ratio_spread": self.bound_ratio_spread(m),
                }
            )
        return {
            "axis": self.axis.value,
            "penalty": self.penalty_kind.value,
            "k": self.k,
            "points": len(self.points),
            "failures": self.failures,
            "orders": orders,
        }


def _point_target(config: SweepConfig, d: int) -> TargetSpec:
    if config.axis is SweepAxis.D:
        e1 = [1.0] + [0.0] * (d - 1)
        return TargetSpec(
            kind=TargetKind.REFERENCE_NETWORK, k=config.tikhonov.k, d=d, neurons=[NeuronSpec(a=1.0, w=e1, b=0.0)]
        )
    return config.target


def _run_point(config: SweepConfig, value: float) -> RatePoint:
    base = config.tikhonov
    kind, k, m_max = base.penalty, base.k, config.orders
    d = int(value) if config.axis is SweepAxis.D else config.target.d
    n = int(value) if config.axis is SweepAxis.N else base.n
    delta = float(value) if config.axis is SweepAxis.DELTA else base.delta
    envelopes = np.array([rate_envelope(kind, delta, n, k, m, base.epsilon_target) for m in range(m_max + 1)])
    empty = np.full(m_max + 1, np.nan)

    target = make_target(_point_target(config, d), config.seed)
    dataset = make_noisy_dataset(target, build_rule(config.training, d), delta, config.noise_kind, config.seed)
    norm_hint = base.norm_hint if base.norm_hint is not None else target.norm_bounds.for_penalty(kind)
    tikhonov = base.model_copy(update={"n": n, "delta": delta, "norm_hint": norm_hint})
    try:
        report = fit(dataset, tikhonov)
    except DivergenceError as exc:
        log.warning("Sweep point %s=%g failed: %s", config.axis, value, exc)
        return RatePoint(value, d, n, delta, empty, empty, envelopes, failure=str(exc))

    evaluation = config.evaluation or QuadratureSpec.default_for(d, config.seed)
    profile = sobolev_profile(report.network, m_max, build_rule(evaluation, d), reference=target)
    hint = norm_hint if norm_hint is not None else math.nan
    if kind is PenaltyKind.EXTENDED_BARRON:
        constant = base.barron_constant if base.barron_constant is not None else default_barron_constant(k)
        l2_bound = l2_bound_barron(delta, n, hint, constant)
    elif kind is PenaltyKind.VARIATION:
        l2_bound = l2_bound_variation(delta, n, hint, k, d)
    else:
        l2_bound = math.nan
    return RatePoint(
        value=value,
        d=d,
        n=n,
        delta=delta,
        errors=np.array([profile.norm(m) for m in range(m_max + 1)]),
        error_bars=np.array([profile.error_bar(m) for m in range(m_max + 1)]),
        envelopes=envelopes,
        lam=report.lam,
        fidelity=report.fidelity,
        penalty=report.penalty,
        norm_hint=hint,
        epsilon_achieved=report.epsilon_achieved,
        l2_bound=l2_bound,
    )


def rate_sweep(config: SweepConfig, *, jobs: int = 1) -> RateReport:
    """Runs every grid point of the sweep, on up to `jobs` threads, and fits the rates.

    A point whose fit diverges is recorded as a failure and the sweep continues. The report is the same for every
    value of `jobs`.
    """
    log.info("Sweeping %s over %s with the %s scheme", config.axis, config.grid, config.tikhonov.penalty)
    points = run_jobs(lambda value: _run_point(config, value), config.grid, jobs)
    ok = [p for p in points if p.failure is None]
    slopes = tuple(
        fit_slope([p.value for p in ok], [p.errors[m] for p in ok]) for m in range(config.orders + 1)
    )
    return RateReport(
        axis=config.axis,
        penalty_kind=config.tikhonov.penalty,
        k=config.tikhonov.k,
        m_max=config.orders,
        points=tuple(points),
        slopes=slopes,
    )


def monotone_within_bars(values: Sequence[float], bars: Sequence[float]) -> bool:
    """Whether `values` never increase by more than the sum of neighbouring error bars."""
    return all(
        later <= earlier + bar_early + bar_late
        for earlier, later, bar_early, bar_late in zip(values, values[1:], bars, bars[1:], strict=False)
    )
