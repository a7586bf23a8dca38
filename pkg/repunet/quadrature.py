"""Numerical integration on the unit cube `(0, 1)^d`.

Two rule families are provided: tensor Gauss-Legendre rules for low dimensions and randomly shifted rank-1 (Korobov)
lattice rules for everything else. Lattice rules are built from several independent shifts, which yields an error
bar for every integral.

All integrals reduce with `numpy.sum`, which uses pairwise summation.
"""

#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from enum import StrEnum
from functools import cache
from typing import Protocol, runtime_checkable

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, PositiveInt

from repunet._random import stream
from repunet.errors import DimensionMismatchError, QuadratureSizeError
from repunet.network import FloatArray, MultiIndex

log = logging.getLogger("repunet:quadrature")

MAX_TENSOR_NODES = 10**7
_BLOCK_SIZE = 8192


class RuleKind(StrEnum):
    GAUSS_LEGENDRE = "gauss_legendre"
    LATTICE = "lattice"


class QuadratureSpec(BaseModel):
    """Configuration of a quadrature rule (`quadrature.*` config keys)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: RuleKind = RuleKind.GAUSS_LEGENDRE
    q: PositiveInt = 24
    """Gauss-Legendre points per axis."""
    n: PositiveInt = 2**14
    """Lattice points per shift, a power of two."""
    shifts: PositiveInt = 8
    """Number of independent random lattice shifts."""
    seed: int = 0

    @classmethod
    def default_for(cls, d: int, seed: int = 0) -> "QuadratureSpec":
        """Evaluation rule used when none is configured."""
        if d <= 3:  # noqa: PLR2004
            return cls(kind=RuleKind.GAUSS_LEGENDRE, q=24)
        if d == 4:  # noqa: PLR2004
            return cls(kind=RuleKind.GAUSS_LEGENDRE, q=12)
        return cls(kind=RuleKind.LATTICE, n=2**14, shifts=8, seed=seed)

    def describe(self) -> str:
        if self.kind is RuleKind.GAUSS_LEGENDRE:
            return f"tensor Gauss-Legendre, {self.q} points per axis"
        return f"rank-1 lattice, {self.n} points x {self.shifts} shifts (seed {self.seed})"


@runtime_checkable
class Evaluable(Protocol):
    @property
    def d(self) -> int: ...

    def evaluate(self, x: ArrayLike) -> FloatArray | float: ...


@runtime_checkable
class Differentiable(Evaluable, Protocol):
    def derivative(self, alpha: MultiIndex, x: ArrayLike) -> FloatArray | float: ...


Integrand = Evaluable | Callable[[FloatArray], ArrayLike] | float


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes in `(0, 1)^d` with positive weights summing to one.

    Nodes are stored in `groups` contiguous blocks of equal size, one per independent lattice shift.
    """

    spec: QuadratureSpec
    nodes: FloatArray
    weights: FloatArray
    groups: int = 1

    @property
    def d(self) -> int:
        return int(self.nodes.shape[1])

    @property
    def size(self) -> int:
        return int(self.nodes.shape[0])

    def integrate(self, values: ArrayLike) -> float:
        return float(np.sum(self.weights * np.asarray(values, dtype=np.float64)))

    def group_integrals(self, values: ArrayLike) -> FloatArray:
        """Integrates separately over every block of nodes."""
        weighted = (self.weights * np.asarray(values, dtype=np.float64)).reshape(self.groups, -1)
        return np.sum(weighted, axis=1) * self.groups

    def integrate_with_error(self, values: ArrayLike) -> tuple[float, float]:
        """Returns the integral and its standard error across shifts (zero for single-block rules)."""
        value = self.integrate(values)
        if self.groups < 2:  # noqa: PLR2004
            return value, 0.0
        per_group = self.group_integrals(values)
        return value, float(np.std(per_group, ddof=1) / math.sqrt(self.groups))


def gauss_legendre_rule(q: int, d: int) -> tuple[FloatArray, FloatArray]:
    """Tensor Gauss-Legendre nodes and weights mapped to `(0, 1)^d`."""
    if q**d > MAX_TENSOR_NODES:
        msg = f"A tensor rule with {q} points per axis in d={d} needs {q**d} nodes (budget {MAX_TENSOR_NODES})"
        raise QuadratureSizeError(msg)
    x, w = np.polynomial.legendre.leggauss(q)
    x = (x + 1.0) / 2.0
    w = w / 2.0
    grids = np.meshgrid(*([x] * d), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weight_grids = np.meshgrid(*([w] * d), indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in weight_grids], axis=1), axis=1)
    return nodes, weights


def _korobov_merit(n: int, z: FloatArray) -> float:
    """Worst-case error criterion `P_2` of a rank-1 lattice in the unweighted Korobov space."""
    frac = np.mod(np.outer(np.arange(n), z), n) / n
    bernoulli = frac**2 - frac + 1.0 / 6.0
    return float(np.mean(np.prod(1.0 + 2.0 * math.pi**2 * bernoulli, axis=1)) - 1.0)


@cache
def korobov_vector(n: int, d: int) -> tuple[int, ...]:
    """Picks a Korobov generating vector `(1, a, a^2, ...) mod n` by searching a fixed candidate set.

    For `n` a power of two every odd generator gives full one-dimensional projections.
    """
    if d == 1:
        return (1,)
    candidates = sorted({int(c) | 1 for c in np.linspace(0.05, 0.5, 48) * n if int(c) | 1 < n})
    best: tuple[float, tuple[int, ...]] | None = None
    for a in candidates:
        z = tuple(pow(a, j, n) for j in range(d))
        merit = _korobov_merit(n, np.array(z, dtype=np.float64))
        if best is None or merit < best[0]:
            best = (merit, z)
    if best is None:
        return tuple(1 for _ in range(d))
    log.debug("Korobov vector for n=%d, d=%d: %s (P2=%.3e)", n, d, best[1][:4], best[0])
    return best[1]


def lattice_rule(n: int, d: int, shifts: int, seed: int) -> tuple[FloatArray, FloatArray]:
    """Randomly shifted rank-1 lattice nodes, one block of `n` nodes per shift."""
    if n & (n - 1):
        msg = f"Lattice rules need a power-of-two number of points, got {n}"
        raise QuadratureSizeError(msg)
    if n * shifts * d > MAX_TENSOR_NODES * 4:
        msg = f"A lattice with {n} points x {shifts} shifts in d={d} exceeds the node budget"
        raise QuadratureSizeError(msg)
    z = np.array(korobov_vector(n, d), dtype=np.int64)
    base = np.mod(np.outer(np.arange(n, dtype=np.int64), z), n) / n
    offsets = stream(seed, "shift").random((shifts, d))
    nodes = np.mod(base[None, :, :] + offsets[:, None, :], 1.0).reshape(shifts * n, d)
    # keep every node strictly inside the cube
    nodes[nodes == 0.0] = np.nextafter(0.0, 1.0)
    weights = np.full(shifts * n, 1.0 / (shifts * n))
    return nodes, weights


def build_rule(spec: QuadratureSpec, d: int) -> QuadratureRule:
    """Builds the rule described by `spec` in dimension `d`; deterministic in `(spec, d)`.

    >>> rule = build_rule(QuadratureSpec(q=3), 2)
    >>> rule.size, round(float(rule.weights.sum()), 12)
    (9, 1.0)
    """
    if d < 1:
        msg = f"The dimension must be at least 1, got {d}"
        raise ValueError(msg)
    if spec.kind is RuleKind.GAUSS_LEGENDRE:
        nodes, weights = gauss_legendre_rule(spec.q, d)
        groups = 1
    else:
        nodes, weights = lattice_rule(spec.n, d, spec.shifts, spec.seed)
        groups = spec.shifts
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(spec=spec, nodes=nodes, weights=weights, groups=groups)


def _evaluate(obj: Integrand, nodes: FloatArray, alpha: MultiIndex | None = None) -> FloatArray:
    """Evaluates `obj` (or its derivative `alpha`) at `nodes` in blocks to bound memory."""
    n_nodes = nodes.shape[0]
    if isinstance(obj, int | float):
        if alpha is not None and alpha.order > 0:
            return np.zeros(n_nodes)
        return np.full(n_nodes, float(obj))
    if isinstance(obj, Evaluable) and obj.d != nodes.shape[1]:
        raise DimensionMismatchError(obj.d, nodes.shape[1])
    out = np.empty(n_nodes)
    for start in range(0, n_nodes, _BLOCK_SIZE):
        block = nodes[start : start + _BLOCK_SIZE]
        if alpha is not None and alpha.order > 0:
            if not isinstance(obj, Differentiable):
                msg = f"{type(obj).__name__} does not provide derivatives"
                raise TypeError(msg)
            out[start : start + len(block)] = obj.derivative(alpha, block)
        elif isinstance(obj, Evaluable):
            out[start : start + len(block)] = obj.evaluate(block)
        else:
            out[start : start + len(block)] = np.broadcast_to(np.asarray(obj(block), dtype=np.float64), len(block))
    return out


def l2_norm(f: Integrand, rule: QuadratureRule) -> float:
    return math.sqrt(max(rule.integrate(_evaluate(f, rule.nodes) ** 2), 0.0))


def l2_distance(f: Integrand, g: Integrand, rule: QuadratureRule) -> float:
    """Quadrature approximation of `||f - g||_{L^2(Omega)}`."""
    diff = _evaluate(f, rule.nodes) - _evaluate(g, rule.nodes)
    return math.sqrt(rule.integrate(diff**2))


@dataclass(frozen=True)
class SobolevProfile:
    """Squared `H^s` seminorms `sum_{|alpha| = s} ||d^alpha u||^2` for `s = 0..m_max`, with shift error bars."""

    seminorms_sq: FloatArray
    group_integrals: FloatArray
    """Cumulative per-shift integrals, shape `(m_max + 1, groups)`."""

    @property
    def m_max(self) -> int:
        return len(self.seminorms_sq) - 1

    def norm(self, m: int) -> float:
        return math.sqrt(float(np.sum(self.seminorms_sq[: m + 1])))

    def error_bar(self, m: int) -> float:
        """Standard error of [`norm`][repunet.quadrature.SobolevProfile.norm] propagated from the shift spread."""
        groups = self.group_integrals.shape[1]
        if groups < 2:  # noqa: PLR2004
            return 0.0
        norm = self.norm(m)
        if norm == 0.0:
            return 0.0
        se_sq = float(np.std(self.group_integrals[m], ddof=1) / math.sqrt(groups))
        return se_sq / (2.0 * norm)


def sobolev_profile(
    obj: Integrand, m_max: int, rule: QuadratureRule, reference: Integrand | None = None
) -> SobolevProfile:
    """Computes all squared seminorms of `obj - reference` up to order `m_max` in one pass.

    Raises:
        UnsupportedOrderError: If `obj` or `reference` is a network of power `k < m_max`.
    """
    seminorms = np.zeros(m_max + 1)
    cumulative = np.zeros(rule.groups)
    group_rows = np.zeros((m_max + 1, rule.groups))
    for s in range(m_max + 1):
        integrand = np.zeros(rule.size)
        for alpha in MultiIndex.of_order(rule.d, s):
            values = _evaluate(obj, rule.nodes, alpha)
            if reference is not None:
                values -= _evaluate(reference, rule.nodes, alpha)
            integrand += values**2
        seminorms[s] = rule.integrate(integrand)
        cumulative = cumulative + rule.group_integrals(integrand)
        group_rows[s] = cumulative
    return SobolevProfile(seminorms_sq=seminorms, group_integrals=group_rows)


def sobolev_norm(obj: Integrand, m: int, rule: QuadratureRule) -> float:
    """Quadrature `H^m` norm; `m = 0` is the `L^2` norm."""
    return sobolev_profile(obj, m, rule).norm(m)


def sobolev_error(net: Integrand, target: Integrand, m: int, rule: QuadratureRule) -> float:
    """Quadrature `H^m` distance between a network and a target with exact derivatives."""
    return sobolev_profile(net, m, rule, reference=target).norm(m)
