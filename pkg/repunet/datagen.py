"""Ground-truth targets with exact derivatives and noisy measurements with a calibrated noise level."""

#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from enum import StrEnum
from typing import Any, Self

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, NonNegativeInt, PositiveFloat, PositiveInt, ValidationError, model_validator

from repunet._random import stream
from repunet.errors import ConfigError, DomainError, QuadratureSizeError
from repunet.network import FloatArray, MultiIndex, Polynomial, RepuNetwork, Scaling, _as_alpha, _as_points, _frozen
from repunet.penalties import PenaltyKind, dictionary_bounds, penalty_value, project_constraints
from repunet.quadrature import QuadratureRule

log = logging.getLogger("repunet:datagen")

FIELD_NEURONS = 8
FIELD_POWER = 3


class TargetKind(StrEnum):
    REFERENCE_NETWORK = "reference_network"
    POLYNOMIAL = "polynomial"
    PRODUCT = "product"


class FactorKind(StrEnum):
    SIN = "sin"
    COS = "cos"
    EXP = "exp"


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class NeuronSpec(_StrictModel):
    a: float
    w: list[float]
    b: float


class TermSpec(_StrictModel):
    coef: float
    alpha: list[NonNegativeInt]


class FactorSpec(_StrictModel):
    """Univariate factor `g(t) = kind(frequency * t + phase)`."""

    kind: FactorKind
    frequency: float = 1.0
    phase: float = 0.0


class TargetSpec(_StrictModel):
    """Configuration of a synthetic target (`target.*` config keys)."""

    kind: TargetKind = TargetKind.REFERENCE_NETWORK
    k: PositiveInt = 2
    d: PositiveInt = 2
    n_ref: PositiveInt = 5
    """Number of neurons of a randomly generated reference network."""
    coef_range: PositiveFloat = 1.0
    """Outer weights of a random reference network are uniform in `[-coef_range, coef_range]`."""
    neurons: list[NeuronSpec] | None = None
    """Explicit reference network neurons; replaces random generation."""
    terms: list[TermSpec] = []
    factors: list[FactorSpec] = []
    amplitude: float = 1.0

    @model_validator(mode="after")
    def _check_kind(self) -> Self:
        if self.kind is TargetKind.REFERENCE_NETWORK:
            for idx, neuron in enumerate(self.neurons or []):
                if len(neuron.w) != self.d:
                    msg = f"neurons.{idx}.w has length {len(neuron.w)}, expected d={self.d}"
                    raise ValueError(msg)
        elif self.kind is TargetKind.POLYNOMIAL:
            if not self.terms:
                msg = "a polynomial target needs at least one entry in 'terms'"
                raise ValueError(msg)
            for idx, term in enumerate(self.terms):
                if len(term.alpha) != self.d:
                    msg = f"terms.{idx}.alpha has length {len(term.alpha)}, expected d={self.d}"
                    raise ValueError(msg)
        elif len(self.factors) != self.d:
            msg = f"a product target needs exactly d={self.d} factors, got {len(self.factors)}"
            raise ValueError(msg)
        return self


@dataclass(frozen=True)
class NormBounds:
    """Known upper bounds on the regularisation norms of a target."""

    barron_upper: float | None = None
    variation_upper: float | None = None
    rbv_upper: float | None = None

    def for_penalty(self, kind: PenaltyKind) -> float | None:
        match PenaltyKind(kind):
            case PenaltyKind.EXTENDED_BARRON:
                return self.barron_upper
            case PenaltyKind.VARIATION:
                return self.variation_upper
            case PenaltyKind.RADON_BV:
                return self.rbv_upper


class TargetFunction(ABC):
    """A function on the unit cube with exact partial derivatives."""

    norm_bounds: NormBounds = NormBounds()

    @property
    @abstractmethod
    def d(self) -> int:
        pass

    @property
    @abstractmethod
    def k(self) -> int:
        """Largest derivative order the target is used with."""

    @abstractmethod
    def evaluate(self, x: ArrayLike) -> FloatArray | float:
        pass

    @abstractmethod
    def derivative(self, alpha: MultiIndex | Sequence[int], x: ArrayLike) -> FloatArray | float:
        pass

    def describe(self) -> str:
        return type(self).__name__


class ReferenceNetworkTarget(TargetFunction):
    """A sum-scaled network with unit inner weights and biases in the dictionary interval."""

    def __init__(self, network: RepuNetwork):
        self.network = project_constraints(network, PenaltyKind.VARIATION)
        abs_sum = penalty_value(self.network.replace(tail=None), PenaltyKind.VARIATION)
        self.norm_bounds = NormBounds(
            barron_upper=penalty_value(self.network.with_scaling(Scaling.MEAN_FIELD), PenaltyKind.EXTENDED_BARRON),
            variation_upper=abs_sum,
            rbv_upper=abs_sum,
        )

    @property
    def d(self) -> int:
        return self.network.d

    @property
    def k(self) -> int:
        return self.network.k

    def evaluate(self, x: ArrayLike) -> FloatArray | float:
        return self.network.evaluate(x)

    def derivative(self, alpha: MultiIndex | Sequence[int], x: ArrayLike) -> FloatArray | float:
        return self.network.derivative(alpha, x)

    def describe(self) -> str:
        return f"reference network with {self.network.n} neurons (k={self.k}, d={self.d})"


class PolynomialTarget(TargetFunction):
    def __init__(self, polynomial: Polynomial, k: int):
        self.polynomial = polynomial
        self._k = k

    @property
    def d(self) -> int:
        return self.polynomial.d

    @property
    def k(self) -> int:
        return self._k

    def evaluate(self, x: ArrayLike) -> FloatArray | float:
        return self.polynomial.evaluate(x)

    def derivative(self, alpha: MultiIndex | Sequence[int], x: ArrayLike) -> FloatArray | float:
        return self.polynomial.derivative(alpha, x)

    def describe(self) -> str:
        return f"polynomial of degree {self.polynomial.degree} with {len(self.polynomial.coefs)} terms"


def _factor_derivative(factor: FactorSpec, order: int, t: FloatArray) -> FloatArray:
    """`order`-th derivative of a univariate factor in closed form."""
    arg = factor.frequency * t + factor.phase
    scale = factor.frequency**order
    match factor.kind:
        case FactorKind.SIN:
            return scale * np.sin(arg + order * math.pi / 2)
        case FactorKind.COS:
            return scale * np.cos(arg + order * math.pi / 2)
        case FactorKind.EXP:
            return scale * np.exp(arg)


class ProductTarget(TargetFunction):
    """`amplitude * prod_j g_j(x_j)` with smooth univariate factors."""

    def __init__(self, factors: Sequence[FactorSpec], k: int, amplitude: float = 1.0):
        self.factors = list(factors)
        self.amplitude = amplitude
        self._k = k

    @property
    def d(self) -> int:
        return len(self.factors)

    @property
    def k(self) -> int:
        return self._k

    def evaluate(self, x: ArrayLike) -> FloatArray | float:
        return self.derivative(MultiIndex.zero(self.d), x)

    def derivative(self, alpha: MultiIndex | Sequence[int], x: ArrayLike) -> FloatArray | float:
        alpha = _as_alpha(alpha, self.d)
        X, single = _as_points(x, self.d)
        out = np.full(X.shape[0], self.amplitude)
        for j, (factor, order) in enumerate(zip(self.factors, alpha.orders, strict=True)):
            out = out * _factor_derivative(factor, order, X[:, j])
        return float(out[0]) if single else out

    def describe(self) -> str:
        return " * ".join(f"{f.kind}({f.frequency:g} x{j + 1} + {f.phase:g})" for j, f in enumerate(self.factors))


def random_reference_network(k: int, d: int, n: int, coef_range: float, rng: np.random.Generator) -> RepuNetwork:
    """Unit inner weights, biases uniform in `[-sqrt(d), sqrt(d)]`, outer weights uniform in the coefficient range."""
    w = rng.standard_normal((n, d))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    c1, c2 = dictionary_bounds(d)
    b = rng.uniform(c1, c2, n)
    a = rng.uniform(-coef_range, coef_range, n)
    return RepuNetwork(k, a, w, b)


def make_target(spec: TargetSpec | Mapping[str, Any], seed: int) -> TargetFunction:
    """Builds a target; deterministic in `(spec, seed)`.

    Raises:
        ConfigError: If `spec` is invalid.
    """
    if not isinstance(spec, TargetSpec):
        try:
            spec = TargetSpec.model_validate(spec)
        except ValidationError as exc:
            msg = f"Invalid target specification: {exc}"
            raise ConfigError(msg) from exc

    match spec.kind:
        case TargetKind.REFERENCE_NETWORK:
            if spec.neurons is None:
                net = random_reference_network(spec.k, spec.d, spec.n_ref, spec.coef_range, stream(seed, "target"))
            else:
                net = RepuNetwork.from_neurons(spec.k, spec.d, [(n.a, n.w, n.b) for n in spec.neurons])
                norms = np.linalg.norm(net.w, axis=1)
                _, c2 = dictionary_bounds(spec.d)
                if np.any(norms == 0.0) or np.any(np.abs(net.b) > c2 * norms + 1e-12):
                    msg = "Reference neurons need non-zero w and |b| <= sqrt(d) * ||w||"
                    raise ConfigError(msg)
            target: TargetFunction = ReferenceNetworkTarget(net)
        case TargetKind.POLYNOMIAL:
            poly = Polynomial.from_terms(spec.d, [(t.coef, t.alpha) for t in spec.terms])
            target = PolynomialTarget(poly, spec.k)
        case TargetKind.PRODUCT:
            target = ProductTarget(spec.factors, spec.k, spec.amplitude)

    log.debug("Target: %s", target.describe())
    return target


class NoiseKind(StrEnum):
    GAUSSIAN_IID = "gaussian_iid"
    """Independent standard normal noise at every sample point."""
    L2_CALIBRATED_FIELD = "l2_calibrated_field"
    """A fixed random smooth function added everywhere."""


@dataclass(frozen=True, eq=False)
class NoisyDataset:
    """Noisy samples `f^delta(x_i)` at the nodes of a training rule."""

    sample_points: FloatArray
    values: FloatArray
    training_weights: FloatArray
    delta_nominal: float
    delta_realized: float
    noise_seed: int
    noise_kind: NoiseKind = NoiseKind.GAUSSIAN_IID

    def __post_init__(self) -> None:
        points = np.array(self.sample_points, dtype=np.float64)
        if points.ndim != 2 or points.shape[0] == 0:  # noqa: PLR2004
            msg = "A dataset needs a non-empty (N, d) array of sample points"
            raise ValueError(msg)
        n_points = points.shape[0]
        object.__setattr__(self, "sample_points", _frozen(points))
        object.__setattr__(self, "values", _frozen(self.values, (n_points,)))
        object.__setattr__(self, "training_weights", _frozen(self.training_weights, (n_points,)))
        object.__setattr__(self, "noise_kind", NoiseKind(self.noise_kind))

    @property
    def d(self) -> int:
        return int(self.sample_points.shape[1])

    @property
    def size(self) -> int:
        return int(self.sample_points.shape[0])

    def to_frame(self) -> pd.DataFrame:
        """Tabular export with the columns `x1, ..., xd, value`."""
        frame = pd.DataFrame(self.sample_points, columns=[f"x{j + 1}" for j in range(self.d)])
        frame["value"] = self.values
        return frame


def _noise_field(d: int, seed: int) -> RepuNetwork:
    """A small random smooth network used as a deterministic noise shape."""
    rng = stream(seed, "field")
    field = random_reference_network(FIELD_POWER, d, FIELD_NEURONS, 1.0, rng)
    return field.replace(a0=float(rng.standard_normal()))


def make_noisy_dataset(
    target: TargetFunction | RepuNetwork, rule: QuadratureRule, delta: float, noise_kind: NoiseKind, seed: int
) -> NoisyDataset:
    """Samples `target` at the nodes of `rule` and adds noise whose discrete `L^2` norm is exactly `delta`.

    Raises:
        QuadratureSizeError: If the rule has no nodes.
    """
    if rule.size == 0:
        msg = "Cannot sample on an empty rule"
        raise QuadratureSizeError(msg)
    if delta < 0 or not math.isfinite(delta):
        msg = f"The noise level must be a finite non-negative number, got {delta}"
        raise DomainError(msg)
    noise_kind = NoiseKind(noise_kind)
    exact = np.asarray(target.evaluate(rule.nodes), dtype=np.float64)
    if delta == 0.0:
        values = exact.copy()
    else:
        if noise_kind is NoiseKind.GAUSSIAN_IID:
            shape = stream(seed, "noise").standard_normal(rule.size)
        else:
            shape = np.asarray(_noise_field(rule.d, seed).evaluate(rule.nodes))
        norm = math.sqrt(rule.integrate(shape**2))
        if norm == 0.0:
            msg = "The sampled noise shape vanishes on the training rule"
            raise DomainError(msg)
        values = exact + (delta / norm) * shape

    realized = math.sqrt(rule.integrate((values - exact) ** 2))
    log.debug("Sampled %d points, delta %.3e (realized %.3e, %s)", rule.size, delta, realized, noise_kind)
    return NoisyDataset(
        sample_points=rule.nodes,
        values=values,
        training_weights=rule.weights,
        delta_nominal=float(delta),
        delta_realized=realized,
        noise_seed=seed,
        noise_kind=noise_kind,
    )
