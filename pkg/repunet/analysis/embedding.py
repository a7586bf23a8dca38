"""Empirical checks of the embedding, norm-relation and interpolation inequalities on finite networks."""

#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from repunet._random import stream
from repunet.analysis.constants import barron_embedding_constant, variation_embedding_constant
from repunet.datagen import random_reference_network
from repunet.network import FloatArray, Polynomial, RepuNetwork, Scaling
from repunet.penalties import PenaltyKind, dictionary_bounds, penalty_value
from repunet.quadrature import QuadratureRule, l2_norm, sobolev_profile

log = logging.getLogger("repunet:embedding")

EMBEDDING_TOL = 1e-6


def random_corpus(
    count: int, d: int, k: int, kind: PenaltyKind, seed: int, max_neurons: int = 8
) -> list[RepuNetwork]:
    """Random networks that satisfy the constraints of `kind`, drawn from the `corpus` stream.

    Mean-field networks get inner weights and biases with standard normal entries; unit-sphere networks are drawn
    like reference targets. Outer weights are standard normal.
    """
    rng = stream(seed, "corpus")
    kind = PenaltyKind(kind)
    nets = []
    for _ in range(count):
        n = int(rng.integers(1, max_neurons + 1))
        if kind is PenaltyKind.EXTENDED_BARRON:
            a, w, b = rng.standard_normal(n), rng.standard_normal((n, d)), rng.standard_normal(n)
            net = RepuNetwork(k, a, w, b, scaling=Scaling.MEAN_FIELD)
        else:
            net = random_reference_network(k, d, n, 1.0, rng).replace(a=rng.standard_normal(n))
            if kind is PenaltyKind.RADON_BV:
                net = net.replace(tail=Polynomial.basis(d, k))
        nets.append(net)
    return nets


@dataclass(frozen=True)
class EmbeddingCheck:
    kind: PenaltyKind
    m: int
    norm: float
    """Quadrature `H^m` norm of the network."""
    error_bar: float
    penalty: float
    """Penalty value plus `|a0|`."""
    constant: float
    bound: float
    passed: bool

    @property
    def margin(self) -> float:
        return self.bound - self.norm


def check_embedding(net: RepuNetwork, m: int, rule: QuadratureRule) -> EmbeddingCheck:
    """Checks `||net||_{H^m} <= constant * (penalty + |a0|)` with the constant of the network's regime.

    Mean-field networks are measured with the extended Barron penalty and `C(d, m, k)`, sum-scaled networks with the
    variation penalty and `c~(d, m, k)`. The inequality holds pointwise, so it holds for every rule with positive
    weights; the tolerance covers rounding and the shift error bar.
    """
    if net.tail is not None:
        msg = "Embedding checks apply to networks without a polynomial tail"
        raise ValueError(msg)
    if net.scaling is Scaling.MEAN_FIELD:
        kind = PenaltyKind.EXTENDED_BARRON
        constant = barron_embedding_constant(net.d, m, net.k)
    else:
        kind = PenaltyKind.VARIATION
        constant = variation_embedding_constant(net.d, m, net.k)
    penalty = penalty_value(net, kind) + abs(net.a0)
    profile = sobolev_profile(net, m, rule)
    norm, error_bar = profile.norm(m), profile.error_bar(m)
    bound = constant * penalty
    return EmbeddingCheck(
        kind=kind,
        m=m,
        norm=norm,
        error_bar=error_bar,
        penalty=penalty,
        constant=constant,
        bound=bound,
        passed=norm <= bound * (1.0 + EMBEDDING_TOL) + error_bar,
    )


@dataclass(frozen=True)
class NormRelationReport:
    ratios: FloatArray
    """Extended Barron penalty of the mean-field form divided by the variation penalty, one per network."""
    bounds: FloatArray
    """`2^k d^(k/2)` for every network."""
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def norm_relation_check(nets: Sequence[RepuNetwork]) -> NormRelationReport:
    """Compares the two penalties of unit-sphere networks: `barron <= 2^k d^(k/2) * variation`.

    Networks with zero variation penalty are left out.
    """
    ratios, bounds = [], []
    for net in nets:
        variation = penalty_value(net, PenaltyKind.VARIATION)
        if variation == 0.0:
            continue
        barron = penalty_value(net.with_scaling(Scaling.MEAN_FIELD), PenaltyKind.EXTENDED_BARRON)
        ratios.append(barron / variation)
        bounds.append(2.0**net.k * net.d ** (net.k / 2))
    ratio_arr, bound_arr = np.array(ratios), np.array(bounds)
    violations = int(np.sum(ratio_arr > bound_arr * (1.0 + 1e-12)))
    return NormRelationReport(ratio_arr, bound_arr, violations)


@dataclass(frozen=True)
class DictionaryBoundReport:
    norms: FloatArray
    """Quadrature `L^2` norms of the sampled dictionary elements."""
    bound: float

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.norms) / self.bound)

    @property
    def passed(self) -> bool:
        return bool(np.all(self.norms <= self.bound * (1.0 + 1e-12)))


def dictionary_bound_check(count: int, k: int, rule: QuadratureRule, seed: int) -> DictionaryBoundReport:
    """Samples dictionary elements `sigma_k(w . x + b)` with unit `w` and `|b| <= sqrt(d)` and compares their `L^2`
    norms with `2^k d^(k/2)`."""
    d = rule.d
    rng = stream(seed, "corpus", 1)
    w = rng.standard_normal((count, d))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    c1, c2 = dictionary_bounds(d)
    b = rng.uniform(c1, c2, count)
    norms = np.array([l2_norm(RepuNetwork(k, [1.0], w[i : i + 1], [b[i]]), rule) for i in range(count)])
    return DictionaryBoundReport(norms, 2.0**k * d ** (k / 2))


@dataclass(frozen=True)
class InterpolationReport:
    m: int
    k: int
    ratios: FloatArray
    """`||u||_{H^m} / (||u||_{H^k}^(m/k) ||u||_{L^2}^(1 - m/k))` for every network that was not skipped."""
    skipped: int

    @property
    def k_fit(self) -> float:
        """Empirical interpolation constant, the largest ratio."""
        return float(np.max(self.ratios)) if self.ratios.size else math.nan

    @property
    def median(self) -> float:
        return float(np.median(self.ratios)) if self.ratios.size else math.nan


def interpolation_check(nets: Sequence[RepuNetwork], m: int, k: int, rule: QuadratureRule) -> InterpolationReport:
    """Fits the constant of `||u||_{H^m} <= K ||u||_{H^k}^(m/k) ||u||_{L^2}^(1 - m/k)` over `nets`.

    Networks with `||u||_{L^2} < 1e-12` are skipped. For `m = 0` and `m = k` every ratio is exactly one.
    """
    if not 0 <= m <= k:
        msg = f"m must satisfy 0 <= m <= k, got m={m}, k={k}"
        raise ValueError(msg)
    theta = m / k
    ratios = []
    skipped = 0
    for idx, net in enumerate(nets):
        profile = sobolev_profile(net, k, rule)
        l2, hm, hk = profile.norm(0), profile.norm(m), profile.norm(k)
        if l2 < 1e-12:  # noqa: PLR2004
            log.warning("Skipping network %d: L2 norm %.3e is too small for a meaningful ratio", idx, l2)
            skipped += 1
            continue
        if m == 0:
            ratios.append(hm / l2)
        elif m == k:
            ratios.append(hm / hk)
        else:
            ratios.append(hm / (hk**theta * l2 ** (1.0 - theta)))
    return InterpolationReport(m, k, np.array(ratios), skipped)
