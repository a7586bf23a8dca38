"""Monte Carlo approximation of finite-atom targets by sampled networks.

A target `f = sum_j p_j a_j sigma_k(w_j . x + b_j)` is approximated by networks whose neurons are drawn i.i.d. from
the atoms. In `barron` mode atoms are drawn with probability `p_j` and averaged with mean-field scaling. In
`variation` mode the target is read as the signed measure `mu_j = p_j a_j` on unit dictionary elements: atoms are drawn
with probability `|mu_j| / ||mu||` and enter with weight `sign(mu_j) ||mu|| / n`.

The error of one draw only depends on the atom counts, so every error is computed exactly (up to quadrature) from the
Gram matrix of the atoms.
"""

#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, NonNegativeFloat

from repunet._random import stream
from repunet.analysis.rates import SlopeFit, fit_slope
from repunet.errors import ConfigError
from repunet.network import FloatArray, RepuNetwork, Scaling
from repunet.penalties import CONSTRAINT_TOL, dictionary_bounds
from repunet.quadrature import QuadratureRule

log = logging.getLogger("repunet:montecarlo")


class McMode(StrEnum):
    BARRON = "barron"
    VARIATION = "variation"


class Atom(BaseModel):
    """One neuron of a finite target distribution, drawn with probability `p`."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    p: NonNegativeFloat
    a: float
    w: list[float]
    b: float


def random_atoms(count: int, d: int, seed: int) -> list[Atom]:
    """Dirichlet probabilities, unit inner weights, dictionary biases and outer weights uniform in `[-1, 1]`."""
    rng = stream(seed, "target", count)
    p = rng.dirichlet(np.ones(count))
    w = rng.standard_normal((count, d))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    c1, c2 = dictionary_bounds(d)
    b = rng.uniform(c1, c2, count)
    a = rng.uniform(-1.0, 1.0, count)
    return [Atom(p=float(p[j]), a=float(a[j]), w=w[j].tolist(), b=float(b[j])) for j in range(count)]


def _validate_atoms(atoms: Sequence[Atom], mode: McMode) -> int:
    if not atoms:
        msg = "At least one atom is required"
        raise ConfigError(msg)
    d = len(atoms[0].w)
    if any(len(atom.w) != d for atom in atoms):
        msg = "All atoms need inner weights of the same dimension"
        raise ConfigError(msg)
    total = math.fsum(atom.p for atom in atoms)
    if abs(total - 1.0) > 1e-9:  # noqa: PLR2004
        msg = f"Atom probabilities must sum to 1, got {total!r}"
        raise ConfigError(msg)
    if mode is McMode.VARIATION:
        c1, c2 = dictionary_bounds(d)
        for idx, atom in enumerate(atoms):
            if abs(float(np.linalg.norm(atom.w)) - 1.0) > CONSTRAINT_TOL or not c1 <= atom.b <= c2:
                msg = f"atoms.{idx} is not a dictionary element (unit w, |b| <= sqrt(d))"
                raise ConfigError(msg)
    return d


def atom_target(atoms: Sequence[Atom], k: int) -> RepuNetwork:
    """The target `sum_j p_j a_j sigma_k(w_j . x + b_j)` as a sum-scaled network."""
    return RepuNetwork(
        k,
        [atom.p * atom.a for atom in atoms],
        [atom.w for atom in atoms],
        [atom.b for atom in atoms],
    )


@dataclass(frozen=True)
class McPoint:
    n: int
    mean_sq_error: float
    """Mean of `||f - f_n||^2` over the trials."""
    standard_error: float
    ceiling: float
    """`sup_j ||X_j||^2 / n` over the sampled terms `X_j`, an upper bound on the expected squared error."""

    @property
    def rms_error(self) -> float:
        return math.sqrt(self.mean_sq_error)

    @property
    def below_ceiling(self) -> bool:
        return self.mean_sq_error <= self.ceiling + 3.0 * self.standard_error


@dataclass(frozen=True)
class McRateReport:
    mode: McMode
    trials: int
    points: tuple[McPoint, ...]
    slope: SlopeFit | None
    """Fit of log RMS error against log n; `None` when some error vanishes."""
    measure_norm: float
    """`sum_j p_j |a_j|`."""

    @property
    def passed(self) -> bool:
        return all(point.below_ceiling for point in self.points)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "n": [p.n for p in self.points],
                "mean_sq_error": [p.mean_sq_error for p in self.points],
                "standard_error": [p.standard_error for p in self.points],
                "rms_error": [p.rms_error for p in self.points],
                "ceiling": [p.ceiling for p in self.points],
                "below_ceiling": [p.below_ceiling for p in self.points],
            }
        )


def _gram(terms: RepuNetwork, rule: QuadratureRule) -> FloatArray:
    """`G_jl = int X_j X_l` for the single-neuron terms of `terms`."""
    values = np.stack([terms.a[j] * np.asarray(_single(terms, j).evaluate(rule.nodes)) for j in range(terms.n)])
    return (values * rule.weights) @ values.T


def _single(net: RepuNetwork, j: int) -> RepuNetwork:
    return RepuNetwork(net.k, [1.0], net.w[j : j + 1], net.b[j : j + 1])


def mc_construction(
    atoms: Sequence[Atom],
    n_grid: Sequence[int],
    trials: int,
    rule: QuadratureRule,
    mode: McMode,
    k: int,
    seed: int,
) -> McRateReport:
    """Estimates `E ||f - f_n||^2_{L^2}` for every `n` of the grid from `trials` independent samplings.

    Raises:
        ConfigError: If the atoms do not form a probability distribution, or in `variation` mode are not dictionary
            elements.
    """
    mode = McMode(mode)
    d = _validate_atoms(atoms, mode)
    if d != rule.d:
        msg = f"Atoms of dimension {d} do not match the {rule.d}-dimensional rule"
        raise ConfigError(msg)
    if trials < 2:  # noqa: PLR2004
        msg = "At least two trials are needed for a standard error"
        raise ConfigError(msg)

    p = np.array([atom.p for atom in atoms])
    a = np.array([atom.a for atom in atoms])
    measure_norm = float(np.sum(p * np.abs(a)))
    if mode is McMode.BARRON:
        probs = p
        term_weights = a
    else:
        probs = p * np.abs(a) / measure_norm if measure_norm > 0 else p
        term_weights = np.sign(a) * measure_norm
    terms = RepuNetwork(k, term_weights, [atom.w for atom in atoms], [atom.b for atom in atoms], scaling=Scaling.SUM)
    gram = _gram(terms, rule)
    sup_term = float(np.max(np.diag(gram)))

    points = []
    for n in n_grid:
        counts = stream(seed, "mc", n).multinomial(n, probs, size=trials)
        coefs = probs[None, :] - counts / n
        errors_sq = np.maximum(np.einsum("tj,jl,tl->t", coefs, gram, coefs), 0.0)
        points.append(
            McPoint(
                n=int(n),
                mean_sq_error=float(np.mean(errors_sq)),
                standard_error=float(np.std(errors_sq, ddof=1) / math.sqrt(trials)),
                ceiling=sup_term / n,
            )
        )
        log.debug("n=%d: mean squared error %.4e", n, points[-1].mean_sq_error)

    rms = [pt.rms_error for pt in points]
    slope = fit_slope([pt.n for pt in points], rms) if all(r > 0 for r in rms) else None
    return McRateReport(mode=mode, trials=trials, points=tuple(points), slope=slope, measure_norm=measure_norm)
