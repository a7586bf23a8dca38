"""Shallow RePU networks with exact evaluation and analytic derivatives.

A network of power `k` on `d` inputs is

    f(x) = s * sum_i a_i * sigma_k(w_i . x + b_i) + a0 + P(x)

where `s = 1/n` for [`Scaling.MEAN_FIELD`][repunet.network.Scaling] and `s = 1` for
[`Scaling.SUM`][repunet.network.Scaling], and `P` is an optional polynomial tail of total degree at most `k`.

Partial derivatives of any order `|alpha| <= k` are available in closed form:

    d^alpha f(x) = s * sum_i a_i * k!/(k-|alpha|)! * w_i^alpha * sigma_{k-|alpha|}(w_i . x + b_i) + d^alpha P(x)
"""

#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import dataclasses
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any, Self, overload

import numpy as np
from numpy.typing import ArrayLike, NDArray

from repunet.errors import DimensionMismatchError, UnsupportedOrderError

FloatArray = NDArray[np.float64]


class Scaling(StrEnum):
    MEAN_FIELD = "mean_field"
    """The neuron sum carries a factor 1/n."""
    SUM = "sum"
    """Plain neuron sum."""


@overload
def sigma(z: float, k: int) -> float: ...


@overload
def sigma(z: NDArray[Any], k: int) -> FloatArray: ...


def sigma(z: float | NDArray[Any], k: int) -> float | FloatArray:
    """Rectified power unit `max(0, z)**k`.

    `sigma(z, 0)` is the right-continuous Heaviside step, i.e. it is 1 at `z = 0`.

    >>> sigma(0.5, 2), sigma(-1.0, 2), sigma(0.0, 0)
    (0.25, 0.0, 1.0)
    """
    if k < 0:
        msg = f"The activation power must be non-negative, got {k}"
        raise ValueError(msg)
    arr = np.asarray(z, dtype=np.float64)
    out = (arr >= 0).astype(np.float64) if k == 0 else np.maximum(arr, 0.0) ** k
    if np.ndim(z) == 0:
        return float(out)
    return out


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Yields all tuples of `parts` non-negative integers summing to `total`, lexicographically descending."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


@dataclass(frozen=True)
class MultiIndex:
    """A multi-index `alpha` of non-negative derivative orders."""

    orders: tuple[int, ...]

    def __post_init__(self) -> None:
        orders = tuple(int(o) for o in self.orders)
        if not orders:
            msg = "A multi-index needs at least one component"
            raise ValueError(msg)
        if any(o < 0 for o in orders):
            msg = f"Multi-index orders must be non-negative, got {orders}"
            raise ValueError(msg)
        object.__setattr__(self, "orders", orders)

    @classmethod
    def of(cls, *orders: int) -> Self:
        return cls(orders)

    @classmethod
    def zero(cls, d: int) -> Self:
        return cls((0,) * d)

    @classmethod
    def unit(cls, d: int, axis: int) -> Self:
        return cls(tuple(int(i == axis) for i in range(d)))

    @classmethod
    def parse(cls, text: str, d: int | None = None) -> Self:
        """Parses a comma-separated multi-index such as `"1,0"`.

        >>> MultiIndex.parse("2, 0, 1").order
        3
        """
        try:
            alpha = cls(tuple(int(part) for part in text.split(",")))
        except ValueError as exc:
            msg = f"'{text}' is not a valid multi-index: {exc}"
            raise ValueError(msg) from exc
        if d is not None and alpha.d != d:
            raise DimensionMismatchError(d, alpha.d)
        return alpha

    @staticmethod
    def up_to(d: int, m: int) -> list["MultiIndex"]:
        """Returns all multi-indices in `d` variables with `|alpha| <= m`, ordered by total order."""
        return [MultiIndex(orders) for total in range(m + 1) for orders in _compositions(total, d)]

    @staticmethod
    def of_order(d: int, s: int) -> list["MultiIndex"]:
        return [MultiIndex(orders) for orders in _compositions(s, d)]

    @property
    def d(self) -> int:
        return len(self.orders)

    @property
    def order(self) -> int:
        """Total order `|alpha|`."""
        return sum(self.orders)

    def power(self, w: ArrayLike) -> FloatArray | float:
        """Computes `w^alpha = prod_i w_i^alpha_i` for a vector or for each row of a matrix.

        >>> MultiIndex.of(1, 2).power([3.0, 2.0])
        12.0
        """
        arr = np.asarray(w, dtype=np.float64)
        if arr.shape[-1] != self.d:
            raise DimensionMismatchError(self.d, arr.shape[-1])
        out = np.prod(arr ** np.asarray(self.orders), axis=-1)
        return float(out) if out.ndim == 0 else out

    def __str__(self) -> str:
        return ",".join(map(str, self.orders))


def _as_points(x: ArrayLike, d: int) -> tuple[FloatArray, bool]:
    """Returns `x` as an `(N, d)` array and whether a single point was given."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim <= 1
    arr = np.atleast_2d(arr)
    if arr.ndim != 2 or arr.shape[1] != d:  # noqa: PLR2004
        raise DimensionMismatchError(d, arr.shape[-1])
    return arr, single


def _as_alpha(alpha: MultiIndex | Sequence[int], d: int) -> MultiIndex:
    alpha = alpha if isinstance(alpha, MultiIndex) else MultiIndex(tuple(alpha))
    if alpha.d != d:
        raise DimensionMismatchError(d, alpha.d)
    return alpha


def _frozen(arr: ArrayLike, shape: tuple[int, ...] | None = None, dtype: type = np.float64) -> NDArray[Any]:
    out = np.array(arr, dtype=dtype)
    if shape is not None:
        out = out.reshape(shape)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Polynomial:
    """A polynomial `sum_j c_j x^{e_j}` in the monomial basis."""

    coefs: FloatArray
    exponents: NDArray[np.int64]

    def __post_init__(self) -> None:
        exponents = np.array(self.exponents, dtype=np.int64)
        if exponents.ndim != 2:  # noqa: PLR2004
            msg = "Polynomial exponents must be a (terms, d) array"
            raise ValueError(msg)
        if np.any(exponents < 0):
            msg = "Polynomial exponents must be non-negative"
            raise ValueError(msg)
        object.__setattr__(self, "exponents", _frozen(exponents, dtype=np.int64))
        object.__setattr__(self, "coefs", _frozen(self.coefs, (exponents.shape[0],)))

    @classmethod
    def from_terms(cls, d: int, terms: Iterable[tuple[float, MultiIndex | Sequence[int]]]) -> Self:
        coefs: list[float] = []
        exponents: list[tuple[int, ...]] = []
        for coef, alpha in terms:
            coefs.append(float(coef))
            exponents.append(_as_alpha(alpha, d).orders)
        return cls(np.array(coefs, dtype=np.float64), np.array(exponents, dtype=np.int64).reshape(len(coefs), d))

    @classmethod
    def zero(cls, d: int) -> Self:
        return cls(np.zeros(0), np.zeros((0, d), dtype=np.int64))

    @classmethod
    def basis(cls, d: int, degree: int) -> Self:
        """Returns the zero polynomial spelled out on all `binom(degree + d, d)` monomials of degree <= `degree`."""
        alphas = MultiIndex.up_to(d, degree)
        return cls(np.zeros(len(alphas)), np.array([alpha.orders for alpha in alphas], dtype=np.int64))

    @classmethod
    def shifted_power(cls, d: int, axis: int, center: float, power: int, scale: float = 1.0) -> Self:
        """Expands `scale * (x_axis - center)**power` into monomials.

        >>> p = Polynomial.shifted_power(2, 0, 0.5, 2)
        >>> float(p.evaluate([0.75, 0.3]))
        0.0625
        """
        terms = [
            (scale * math.comb(power, j) * (-center) ** (power - j), tuple(j if i == axis else 0 for i in range(d)))
            for j in range(power + 1)
        ]
        return cls.from_terms(d, terms)

    @property
    def d(self) -> int:
        return int(self.exponents.shape[1])

    @property
    def degree(self) -> int:
        return int(self.exponents.sum(axis=1).max()) if len(self.coefs) else 0

    @property
    def terms(self) -> list[tuple[float, MultiIndex]]:
        return [(float(c), MultiIndex(tuple(e))) for c, e in zip(self.coefs, self.exponents, strict=True)]

    def with_coefs(self, coefs: ArrayLike) -> "Polynomial":
        return Polynomial(np.asarray(coefs, dtype=np.float64), self.exponents)

    def monomials(self, x: ArrayLike) -> FloatArray:
        """Evaluates every monomial of the basis, returning an `(N, terms)` array."""
        X, _ = _as_points(x, self.d)
        return np.prod(X[:, None, :] ** self.exponents[None, :, :], axis=2)

    def evaluate(self, x: ArrayLike) -> FloatArray | float:
        X, single = _as_points(x, self.d)
        out = self.monomials(X) @ self.coefs if len(self.coefs) else np.zeros(X.shape[0])
        return float(out[0]) if single else out

    def derivative(self, alpha: MultiIndex | Sequence[int], x: ArrayLike) -> FloatArray | float:
        alpha = _as_alpha(alpha, self.d)
        return self.differentiate(alpha).evaluate(x)

    def differentiate(self, alpha: MultiIndex | Sequence[int]) -> "Polynomial":
        """Returns `d^alpha` of this polynomial as a polynomial on the same number of terms."""
        alpha = _as_alpha(alpha, self.d)
        orders = np.asarray(alpha.orders)
        remaining = self.exponents - orders[None, :]
        alive = np.all(remaining >= 0, axis=1)
        factors = np.array(
            [math.prod(math.perm(int(e), int(o)) for e, o in zip(row, orders, strict=True)) for row in self.exponents],
            dtype=np.float64,
        ).reshape(len(self.coefs))
        return Polynomial(np.where(alive, self.coefs * factors, 0.0), np.maximum(remaining, 0))


@dataclass(frozen=True)
class NetworkGradient:
    """Parameter-shaped record of derivatives with respect to the parameters of a network."""

    a: FloatArray
    w: FloatArray
    b: FloatArray
    a0: float = 0.0
    tail: FloatArray = field(default_factory=lambda: np.zeros(0))

    def flat(self) -> FloatArray:
        """Flattens in the order used by [`RepuNetwork.parameters`][repunet.network.RepuNetwork.parameters]."""
        return np.concatenate([self.a, self.w.ravel(), self.b, [self.a0], self.tail])

    def __add__(self, other: "NetworkGradient") -> "NetworkGradient":
        return NetworkGradient(
            self.a + other.a, self.w + other.w, self.b + other.b, self.a0 + other.a0, self.tail + other.tail
        )

    def scaled(self, factor: float) -> "NetworkGradient":
        return NetworkGradient(factor * self.a, factor * self.w, factor * self.b, factor * self.a0, factor * self.tail)


@dataclass(frozen=True, eq=False)
class RepuNetwork:
    """An immutable shallow RePU network.

    Parameters are stored as read-only arrays: `a` with shape `(n,)`, `w` with shape `(n, d)` and `b` with shape `(n,)`.
    Use [`from_neurons`][repunet.network.RepuNetwork.from_neurons] to build one from `(a, w, b)` triples.
    """

    k: int
    a: FloatArray
    w: FloatArray
    b: FloatArray
    a0: float = 0.0
    scaling: Scaling = Scaling.SUM
    tail: Polynomial | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            msg = f"The activation power k must be at least 1, got {self.k}"
            raise ValueError(msg)
        w = np.array(self.w, dtype=np.float64)
        if w.ndim != 2:  # noqa: PLR2004
            msg = f"Inner weights must be an (n, d) array, got shape {w.shape}"
            raise ValueError(msg)
        n, d = w.shape
        if d < 1:
            msg = "The input dimension must be at least 1"
            raise ValueError(msg)
        object.__setattr__(self, "w", _frozen(w))
        object.__setattr__(self, "a", _frozen(self.a, (n,)))
        object.__setattr__(self, "b", _frozen(self.b, (n,)))
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "scaling", Scaling(self.scaling))
        if self.tail is not None:
            if self.tail.d != d:
                raise DimensionMismatchError(d, self.tail.d)
            if self.tail.degree > self.k:
                msg = f"The polynomial tail has degree {self.tail.degree} > k={self.k}"
                raise ValueError(msg)

    @classmethod
    def from_neurons(
        cls,
        k: int,
        d: int,
        neurons: Iterable[tuple[float, Sequence[float], float]] = (),
        *,
        a0: float = 0.0,
        scaling: Scaling = Scaling.SUM,
        tail: Polynomial | None = None,
    ) -> Self:
        triples = list(neurons)
        a = np.array([t[0] for t in triples], dtype=np.float64)
        w = np.array([list(t[1]) for t in triples], dtype=np.float64) if triples else np.zeros((0, d))
        if w.ndim != 2 or w.shape[1] != d:  # noqa: PLR2004
            raise DimensionMismatchError(d, w.shape[1])
        b = np.array([t[2] for t in triples], dtype=np.float64)
        return cls(k, a, w, b, a0=a0, scaling=scaling, tail=tail)

    @property
    def d(self) -> int:
        return int(self.w.shape[1])

    @property
    def n(self) -> int:
        return int(self.a.shape[0])

    @property
    def scale(self) -> float:
        """Factor in front of the neuron sum."""
        if self.scaling is Scaling.MEAN_FIELD and self.n > 0:
            return 1.0 / self.n
        return 1.0

    @property
    def neurons(self) -> list[tuple[float, FloatArray, float]]:
        return [(float(a), w, float(b)) for a, w, b in zip(self.a, self.w, self.b, strict=True)]

    def replace(self, **changes: Any) -> "RepuNetwork":
        return dataclasses.replace(self, **changes)

    def with_scaling(self, scaling: Scaling) -> "RepuNetwork":
        """Converts between scaling modes without changing the represented function."""
        scaling = Scaling(scaling)
        if scaling is self.scaling or self.n == 0:
            return self.replace(scaling=scaling)
        factor = float(self.n) if scaling is Scaling.MEAN_FIELD else 1.0 / self.n
        return self.replace(a=self.a * factor, scaling=scaling)

    def preactivation(self, x: ArrayLike) -> FloatArray:
        X, _ = _as_points(x, self.d)
        return X @ self.w.T + self.b

    def evaluate(self, x: ArrayLike) -> FloatArray | float:
        """Evaluates the network at one point of shape `(d,)` or at a batch of shape `(N, d)`."""
        X, single = _as_points(x, self.d)
        out = self.scale * (sigma(X @ self.w.T + self.b, self.k) @ self.a) + self.a0
        if self.tail is not None:
            out = out + self.tail.evaluate(X)
        return float(out[0]) if single else out

    def derivative(self, alpha: MultiIndex | Sequence[int], x: ArrayLike) -> FloatArray | float:
        """Evaluates the partial derivative `d^alpha` in closed form.

        Raises:
            UnsupportedOrderError: If `|alpha| > k`.
        """
        alpha = _as_alpha(alpha, self.d)
        s = alpha.order
        if s > self.k:
            raise UnsupportedOrderError(s, self.k)
        X, single = _as_points(x, self.d)
        if s == 0:
            out = np.asarray(self.evaluate(X))
        else:
            coefs = self.a * math.perm(self.k, s) * np.asarray(alpha.power(self.w)).reshape(self.n)
            out = self.scale * (sigma(X @ self.w.T + self.b, self.k - s) @ coefs)
            if self.tail is not None:
                out = out + self.tail.derivative(alpha, X)
        return float(out[0]) if single else out

    def pullback(self, x: ArrayLike, cotangent: ArrayLike) -> NetworkGradient:
        """Contracts the parameter Jacobian at the points `x` with `cotangent`.

        Returns `sum_j cotangent_j * d f(x_j) / d theta` for every parameter `theta`.
        """
        X, _ = _as_points(x, self.d)
        c = np.asarray(cotangent, dtype=np.float64).reshape(X.shape[0])
        Z = X @ self.w.T + self.b
        act = sigma(Z, self.k)
        slope = self.k * sigma(Z, self.k - 1)
        weighted = slope.T @ c
        grad_w = self.scale * self.a[:, None] * ((slope * c[:, None]).T @ X)
        tail = self.tail.monomials(X).T @ c if self.tail is not None else np.zeros(0)
        return NetworkGradient(
            a=self.scale * (act.T @ c),
            w=grad_w.reshape(self.n, self.d),
            b=self.scale * self.a * weighted,
            a0=float(np.sum(c)),
            tail=tail,
        )

    def parameter_gradient(self, x: ArrayLike) -> NetworkGradient:
        """Gradient of `f(x)` with respect to all parameters at a single point."""
        X, _ = _as_points(x, self.d)
        if X.shape[0] != 1:
            msg = "parameter_gradient takes a single point; use pullback for batches"
            raise ValueError(msg)
        return self.pullback(X, [1.0])

    def parameters(self) -> FloatArray:
        """Flattens `(a, w, b, a0, tail coefficients)` into one vector."""
        tail = self.tail.coefs if self.tail is not None else np.zeros(0)
        return np.concatenate([self.a, self.w.ravel(), self.b, [self.a0], tail])

    def with_parameters(self, theta: ArrayLike) -> "RepuNetwork":
        theta = np.asarray(theta, dtype=np.float64)
        n, d = self.n, self.d
        sizes = np.cumsum([n, n * d, n, 1])
        tail_size = len(self.tail.coefs) if self.tail is not None else 0
        if theta.shape != (int(sizes[-1]) + tail_size,):
            msg = f"Expected {int(sizes[-1]) + tail_size} parameters, got {theta.shape}"
            raise ValueError(msg)
        a, w, b, a0, tail = np.split(theta, sizes)
        return self.replace(
            a=a,
            w=w.reshape(n, d),
            b=b,
            a0=float(a0[0]),
            tail=self.tail.with_coefs(tail) if self.tail is not None else None,
        )
