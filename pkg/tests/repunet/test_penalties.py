#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import math

import numpy as np
import pytest

from repunet.errors import ConstraintError, DegenerateNeuronError
from repunet.network import Polynomial, RepuNetwork, Scaling
from repunet.penalties import (
    PenaltyKind,
    barron_p_norm,
    check_constraints,
    outer_weight_costs,
    penalty_subgradient,
    penalty_value,
    project_constraints,
)


def unit_net(a: list[float], d: int = 2, k: int = 2, tail: Polynomial | None = None) -> RepuNetwork:
    rng = np.random.default_rng(len(a))
    w = rng.standard_normal((len(a), d))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    return RepuNetwork(k, a, w, rng.uniform(-1.0, 1.0, len(a)), tail=tail)


def test_extended_barron_value() -> None:
    net = RepuNetwork.from_neurons(
        2, 2, [(2.0, (1.0, 0.0), 0.5), (-1.0, (0.0, 1.0), -0.5)], scaling=Scaling.MEAN_FIELD
    )

    assert penalty_value(net, PenaltyKind.EXTENDED_BARRON) == pytest.approx(3.375)


def test_variation_value() -> None:
    assert penalty_value(unit_net([0.3, -0.7]), PenaltyKind.VARIATION) == pytest.approx(1.0)


def test_outer_weight_costs() -> None:
    rng = np.random.default_rng(5)
    net = RepuNetwork(
        2, rng.standard_normal(4), rng.standard_normal((4, 2)), rng.standard_normal(4), scaling="mean_field"
    )
    unit = unit_net([0.5, -1.5, 2.0])

    costs = outer_weight_costs(net, PenaltyKind.EXTENDED_BARRON)

    assert float(np.sum(costs * np.abs(net.a))) == pytest.approx(penalty_value(net, PenaltyKind.EXTENDED_BARRON))
    np.testing.assert_array_equal(outer_weight_costs(unit, PenaltyKind.VARIATION), np.ones(3))
    assert outer_weight_costs(unit, PenaltyKind.RADON_BV).shape == (3,)


def test_radon_bv_ignores_tail() -> None:
    tail = Polynomial.basis(2, 2).with_coefs([1.0, -2.0, 3.0, 0.5, 0.1, 7.0])
    net = RepuNetwork.from_neurons(2, 2, [], tail=tail)

    assert penalty_value(net, PenaltyKind.RADON_BV) == 0.0


def test_rescaling_invariance() -> None:
    rng = np.random.default_rng(0)
    net = RepuNetwork(
        3, rng.standard_normal(5), rng.standard_normal((5, 2)), rng.standard_normal(5), scaling="mean_field"
    )
    base = penalty_value(net, PenaltyKind.EXTENDED_BARRON)
    for c in (1e-3, 0.5, 7.0, 1e3):
        scaled = net.replace(a=net.a / c**3, w=net.w * c, b=net.b * c)
        assert penalty_value(scaled, PenaltyKind.EXTENDED_BARRON) == pytest.approx(base, rel=1e-12)


@pytest.mark.parametrize(
    ("kind", "net", "match"),
    [
        (PenaltyKind.EXTENDED_BARRON, RepuNetwork.from_neurons(2, 1, [(1.0, (1.0,), 0.0)]), "mean_field"),
        (PenaltyKind.VARIATION, RepuNetwork.from_neurons(2, 2, [(1.0, (3.0, 4.0), 0.0)]), "is not 1"),
        (PenaltyKind.VARIATION, RepuNetwork.from_neurons(2, 4, [(1.0, (1.0, 0.0, 0.0, 0.0), 2.5)]), "outside"),
        (PenaltyKind.RADON_BV, RepuNetwork.from_neurons(2, 1, [(1.0, (1.0,), 0.0)]), "tail is required"),
    ],
)
def test_constraint_violations(kind: PenaltyKind, net: RepuNetwork, match: str) -> None:
    with pytest.raises(ConstraintError, match=match):
        penalty_value(net, kind)


def test_constraint_error_names_neuron() -> None:
    net = RepuNetwork.from_neurons(2, 2, [(1.0, (1.0, 0.0), 0.0), (1.0, (1.0, 1.0), 0.0)])

    with pytest.raises(ConstraintError) as exc_info:
        check_constraints(net, PenaltyKind.VARIATION)

    assert exc_info.value.neuron == 1


def test_zero_inner_weight_is_degenerate() -> None:
    net = RepuNetwork.from_neurons(2, 2, [(1.0, (0.0, 0.0), 0.0)])

    with pytest.raises(DegenerateNeuronError):
        check_constraints(net, PenaltyKind.VARIATION)
    with pytest.raises(DegenerateNeuronError):
        project_constraints(net, PenaltyKind.VARIATION)


def test_radon_bv_does_not_restrict_bias() -> None:
    net = RepuNetwork.from_neurons(2, 1, [(1.0, (1.0,), 5.0)], tail=Polynomial.basis(1, 2))

    check_constraints(net, PenaltyKind.RADON_BV)


def test_subgradient_at_zero_outer_weight() -> None:
    net = RepuNetwork.from_neurons(
        2, 2, [(0.0, (1.0, -2.0), 0.5), (1.0, (1.0, 1.0), 1.0)], scaling=Scaling.MEAN_FIELD
    )

    grad = penalty_subgradient(net, PenaltyKind.EXTENDED_BARRON)

    assert grad.a[0] == pytest.approx(3.5**2 / 2)
    np.testing.assert_array_equal(grad.w[0], [0.0, 0.0])
    assert grad.b[0] == 0.0
    # smooth neuron: |a| k t^(k-1) / n * sign
    np.testing.assert_allclose(grad.w[1], [3.0, 3.0])
    assert grad.b[1] == pytest.approx(3.0)


def test_subgradient_matches_finite_differences() -> None:
    rng = np.random.default_rng(1)
    net = RepuNetwork(
        2, rng.standard_normal(3), rng.standard_normal((3, 2)), rng.standard_normal(3), scaling="mean_field"
    )
    theta = net.parameters()
    grad = penalty_subgradient(net, PenaltyKind.EXTENDED_BARRON).flat()
    h = 1e-6
    for i in range(theta.size):
        step = np.zeros_like(theta)
        step[i] = h
        plus = penalty_value(net.with_parameters(theta + step), PenaltyKind.EXTENDED_BARRON)
        minus = penalty_value(net.with_parameters(theta - step), PenaltyKind.EXTENDED_BARRON)
        assert grad[i] == pytest.approx((plus - minus) / (2 * h), rel=1e-6, abs=1e-8)


def test_variation_subgradient_is_sign_of_outer_weights() -> None:
    net = unit_net([0.5, -2.0, 0.0])

    grad = penalty_subgradient(net, PenaltyKind.VARIATION)

    np.testing.assert_array_equal(grad.a, [1.0, -1.0, 0.0])
    assert not grad.w.any()
    assert not grad.b.any()


def test_project_constraints_normalises() -> None:
    net = RepuNetwork.from_neurons(2, 2, [(1.0, (3.0, 4.0), 0.5)])
    X = np.random.default_rng(2).random((20, 2))

    projected = project_constraints(net, PenaltyKind.VARIATION)

    np.testing.assert_allclose(projected.w, [[0.6, 0.8]])
    assert projected.a[0] == pytest.approx(25.0)
    assert projected.b[0] == pytest.approx(0.1)
    np.testing.assert_allclose(projected.evaluate(X), net.evaluate(X), rtol=1e-12, atol=1e-12)


def test_project_constraints_clamps_bias() -> None:
    net = RepuNetwork.from_neurons(2, 4, [(1.0, (1.0, 0.0, 0.0, 0.0), 10.0)])

    projected = project_constraints(net, PenaltyKind.VARIATION)

    assert projected.b[0] == 2.0


def test_project_constraints_is_idempotent() -> None:
    net = unit_net([1.0, -0.5])

    assert project_constraints(net, PenaltyKind.VARIATION) is net


def test_project_constraints_attaches_tail() -> None:
    projected = project_constraints(unit_net([1.0]), PenaltyKind.RADON_BV)

    assert projected.tail is not None
    assert projected.tail.degree == 2
    assert not projected.tail.coefs.any()
    check_constraints(projected, PenaltyKind.RADON_BV)


def test_project_constraints_fixes_scaling() -> None:
    net = RepuNetwork.from_neurons(2, 1, [(2.0, (1.0,), 0.0), (4.0, (1.0,), 0.0)])

    projected = project_constraints(net, PenaltyKind.EXTENDED_BARRON)

    assert projected.scaling is Scaling.MEAN_FIELD
    np.testing.assert_allclose(projected.a, [4.0, 8.0])


def test_barron_p_norm_is_monotone() -> None:
    rng = np.random.default_rng(3)
    net = RepuNetwork(2, rng.standard_normal(6), rng.standard_normal((6, 2)), rng.standard_normal(6), a0=0.7)
    values = [barron_p_norm(net, p) for p in (1, 1.5, 2, 4, 10, math.inf)]

    assert all(later >= earlier - 1e-12 for earlier, later in zip(values, values[1:], strict=False))


def test_barron_p_norm_one_is_penalty_plus_bias() -> None:
    rng = np.random.default_rng(4)
    net = RepuNetwork(
        2, rng.standard_normal(3), rng.standard_normal((3, 2)), rng.standard_normal(3), a0=-0.2, scaling="mean_field"
    )

    assert barron_p_norm(net, 1) == pytest.approx(penalty_value(net, PenaltyKind.EXTENDED_BARRON) + 0.2)


def test_barron_p_norm_rejects_small_p() -> None:
    with pytest.raises(ValueError, match="at least 1"):
        barron_p_norm(unit_net([1.0]), 0.5)
