"""Penalty functionals of the three regularisation regimes.

Each regime constrains the network parametrisation and measures it with a finite-network functional:

* `extended_barron`: mean-field scaling, `(1/n) sum_i |a_i| (||w_i||_1 + |b_i|)^k`.
* `variation`: sum scaling, unit inner weights and biases in `[-sqrt(d), sqrt(d)]`, `sum_i |a_i|`.
* `radon_bv`: sum scaling, unit inner weights and a polynomial tail of degree at most `k`, `sum_i |a_i|`. The tail
  lies in the null space of the seminorm and contributes nothing.

The `radon_bv` value is an upper bound on the seminorm of the represented function: two neurons at antipodal
dictionary points may partially cancel.

The penalty values are returned unsquared.
"""

#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import math
from enum import StrEnum

import numpy as np

from repunet.errors import ConstraintError, DegenerateNeuronError
from repunet.network import FloatArray, NetworkGradient, Polynomial, RepuNetwork, Scaling

CONSTRAINT_TOL = 1e-9
"""Allowed deviation of `||w_i||_2` from one, and of `b_i` from the dictionary interval."""


class PenaltyKind(StrEnum):
    EXTENDED_BARRON = "extended_barron"
    VARIATION = "variation"
    RADON_BV = "radon_bv"

    @property
    def scaling(self) -> Scaling:
        """Scaling mode networks of this regime must use."""
        return Scaling.MEAN_FIELD if self is PenaltyKind.EXTENDED_BARRON else Scaling.SUM

    @property
    def unit_sphere(self) -> bool:
        return self is not PenaltyKind.EXTENDED_BARRON


def dictionary_bounds(d: int) -> tuple[float, float]:
    """Bias interval `[c1, c2] = [-sqrt(d), sqrt(d)]`, the diameter of the unit cube on both sides."""
    return -math.sqrt(d), math.sqrt(d)


def _path_terms(net: RepuNetwork) -> FloatArray:
    """`||w_i||_1 + |b_i|` for every neuron."""
    return np.sum(np.abs(net.w), axis=1) + np.abs(net.b)


def check_constraints(net: RepuNetwork, kind: PenaltyKind) -> None:
    """Validates that `net` is a member of the network class of `kind`.

    Raises:
        ConstraintError: On the first violated constraint.
        DegenerateNeuronError: If a unit-sphere regime meets a neuron with `w_i = 0`.
    """
    kind = PenaltyKind(kind)
    if net.scaling is not kind.scaling:
        raise ConstraintError(kind, f"requires {kind.scaling} scaling, got {net.scaling}")
    if not kind.unit_sphere:
        return
    norms = np.linalg.norm(net.w, axis=1)
    for idx, norm in enumerate(norms):
        if norm == 0.0:
            raise DegenerateNeuronError(kind, idx)
        if abs(norm - 1.0) > CONSTRAINT_TOL:
            raise ConstraintError(kind, f"||w||_2 = {norm!r} is not 1", idx)
    if kind is PenaltyKind.VARIATION:
        c1, c2 = dictionary_bounds(net.d)
        for idx, b in enumerate(net.b):
            if not c1 - CONSTRAINT_TOL <= b <= c2 + CONSTRAINT_TOL:
                raise ConstraintError(kind, f"bias {b!r} outside [{c1}, {c2}]", idx)
    if kind is PenaltyKind.RADON_BV and net.tail is None:
        raise ConstraintError(kind, "a polynomial tail is required (it may be zero)")


def penalty_value(net: RepuNetwork, kind: PenaltyKind, *, check: bool = True) -> float:
    """Computes the penalty of `net` under `kind`.

    >>> neurons = [(2.0, (1.0, 0.0), 0.5), (-1.0, (0.0, 1.0), -0.5)]
    >>> net = RepuNetwork.from_neurons(2, 2, neurons, scaling="mean_field")
    >>> penalty_value(net, PenaltyKind.EXTENDED_BARRON)
    3.375
    """
    kind = PenaltyKind(kind)
    if check:
        check_constraints(net, kind)
    if net.n == 0:
        return 0.0
    return float(np.sum(np.abs(net.a) * outer_weight_costs(net, kind)))


def outer_weight_costs(net: RepuNetwork, kind: PenaltyKind) -> FloatArray:
    """Costs `c_i` such that the penalty of `net` is `sum_i c_i |a_i|` while the inner weights stay fixed.

    >>> net = RepuNetwork.from_neurons(2, 1, [(1.0, (2.0,), -1.0)], scaling="mean_field")
    >>> outer_weight_costs(net, PenaltyKind.EXTENDED_BARRON).tolist()
    [9.0]
    """
    kind = PenaltyKind(kind)
    if kind is PenaltyKind.EXTENDED_BARRON:
        return _path_terms(net) ** net.k / max(net.n, 1)
    return np.ones(net.n)


def penalty_subgradient(net: RepuNetwork, kind: PenaltyKind, *, check: bool = True) -> NetworkGradient:
    """Returns a subgradient of [`penalty_value`][repunet.penalties.penalty_value] in parameter shape.

    Non-differentiable absolute values use `sign(0) = 0`, with one exception: for `extended_barron` the derivative
    with respect to `a_i = 0` is the right derivative `(||w_i||_1 + |b_i|)^k / n`, while the `w_i` and `b_i`
    components of such a neuron vanish. The output weight `a0` and the polynomial tail are never penalised.
    """
    kind = PenaltyKind(kind)
    if check:
        check_constraints(net, kind)
    tail = np.zeros(len(net.tail.coefs)) if net.tail is not None else np.zeros(0)
    if net.n == 0:
        return NetworkGradient(np.zeros(0), np.zeros((0, net.d)), np.zeros(0), 0.0, tail)
    if kind is not PenaltyKind.EXTENDED_BARRON:
        return NetworkGradient(np.sign(net.a), np.zeros_like(net.w), np.zeros_like(net.b), 0.0, tail)
    k, n = net.k, net.n
    t = _path_terms(net)
    sign_a = np.where(net.a == 0.0, 1.0, np.sign(net.a))
    inner = np.abs(net.a) * k * t ** (k - 1) / n
    return NetworkGradient(
        a=sign_a * t**k / n,
        w=inner[:, None] * np.sign(net.w),
        b=inner * np.sign(net.b),
        a0=0.0,
        tail=tail,
    )


def project_constraints(net: RepuNetwork, kind: PenaltyKind) -> RepuNetwork:
    """Maps `net` into the network class of a unit-sphere regime.

    Every `w_i` is normalised to unit length while `a_i` is multiplied by `||w_i||^k` and `b_i` divided by
    `||w_i||`, which leaves the network function unchanged. Biases are then clamped to `[-sqrt(d), sqrt(d)]` and a
    zero tail is attached for `radon_bv` if missing. Neurons already within rounding of the sphere are left
    untouched, so projecting twice gives the same network. `extended_barron` has no constraints to project onto and
    only gets its scaling fixed.

    Raises:
        DegenerateNeuronError: If some `w_i` is zero.
    """
    kind = PenaltyKind(kind)
    if net.scaling is not kind.scaling:
        net = net.with_scaling(kind.scaling)
    if not kind.unit_sphere:
        return net

    norms = np.linalg.norm(net.w, axis=1)
    for idx in np.flatnonzero(norms == 0.0):
        raise DegenerateNeuronError(kind, int(idx))
    move = np.abs(norms - 1.0) > 1e-12
    factor = np.where(move, norms, 1.0)
    w = net.w / factor[:, None]
    a = net.a * factor**net.k
    b = net.b / factor
    c1, c2 = dictionary_bounds(net.d)
    b = np.clip(b, c1, c2)

    tail = net.tail
    if kind is PenaltyKind.RADON_BV and tail is None:
        tail = Polynomial.basis(net.d, net.k)
    if not move.any() and np.array_equal(b, net.b) and tail is net.tail:
        return net
    return net.replace(a=a, w=w, b=b, tail=tail)


def barron_p_norm(net: RepuNetwork, p: float) -> float:
    """Finite-network Barron `p`-norm of a mean-field network, including the output bias.

    `((1/n) sum_i |a_i|^p (||w_i||_1 + |b_i|)^(kp))^(1/p) + |a0|` for finite `p >= 1`, and
    `max_i |a_i| (||w_i||_1 + |b_i|)^k + |a0|` for `p = inf`. The neuron average is a mean over a probability
    measure, so the value is non-decreasing in `p`; `p = 1` without output bias is the `extended_barron` penalty.

    >>> net = RepuNetwork.from_neurons(1, 1, [(3.0, (1.0,), 0.0)], scaling="mean_field")
    >>> barron_p_norm(net, 1), barron_p_norm(net, math.inf)
    (3.0, 3.0)
    """
    if p < 1:
        msg = f"p must be at least 1, got {p}"
        raise ValueError(msg)
    net = net.with_scaling(Scaling.MEAN_FIELD)
    terms = np.abs(net.a) * _path_terms(net) ** net.k
    if net.n == 0:
        return abs(net.a0)
    if math.isinf(p):
        return float(np.max(terms)) + abs(net.a0)
    return float(np.mean(terms**p)) ** (1.0 / p) + abs(net.a0)
