#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import numpy as np
import pytest

from repunet.errors import DimensionMismatchError, UnsupportedOrderError
from repunet.network import MultiIndex, Polynomial, RepuNetwork, Scaling, sigma


@pytest.mark.parametrize(
    ("z", "k", "expected"),
    [
        (-1.0, 2, 0.0),
        (0.5, 2, 0.25),
        (0.0, 0, 1.0),
        (-0.1, 0, 0.0),
        (2.0, 1, 2.0),
        (2.0, 3, 8.0),
    ],
)
def test_sigma(z: float, k: int, expected: float) -> None:
    assert sigma(z, k) == expected


def test_sigma_rejects_negative_power() -> None:
    with pytest.raises(ValueError, match="non-negative"):
        sigma(1.0, -1)


def test_multi_index_parse_and_power() -> None:
    alpha = MultiIndex.parse("1,2")

    assert alpha.orders == (1, 2)
    assert alpha.order == 3
    assert alpha.power([3.0, 2.0]) == 12.0
    assert str(alpha) == "1,2"


def test_multi_index_rejects_negative_orders() -> None:
    with pytest.raises(ValueError, match="non-negative"):
        MultiIndex.of(1, -1)


def test_multi_index_parse_checks_dimension() -> None:
    with pytest.raises(DimensionMismatchError):
        MultiIndex.parse("1,0,0", d=2)


def test_multi_index_up_to_counts_monomials() -> None:
    # binom(m + d, d)
    assert len(MultiIndex.up_to(2, 2)) == 6
    assert len(MultiIndex.up_to(3, 2)) == 10
    assert [alpha.order for alpha in MultiIndex.up_to(2, 1)] == [0, 1, 1]


@pytest.mark.parametrize(
    ("net", "x", "expected"),
    [
        (RepuNetwork.from_neurons(2, 2, [(1.0, (1.0, 0.0), 0.0)]), (0.5, 0.9), 0.25),
        (RepuNetwork.from_neurons(1, 1, [(1.0, (1.0,), 0.0), (-1.0, (1.0,), 0.0)]), (0.7,), 0.0),
        (
            RepuNetwork.from_neurons(2, 2, [(2.0, (1.0, 1.0), 0.0), (2.0, (1.0, 1.0), 0.0)], scaling="mean_field"),
            (0.5, 0.5),
            2.0,
        ),
    ],
)
def test_evaluate(net: RepuNetwork, x: tuple[float, ...], expected: float) -> None:
    assert net.evaluate(x) == pytest.approx(expected, abs=1e-15)


def test_empty_network_evaluates_to_output_bias() -> None:
    net = RepuNetwork.from_neurons(3, 2, [], a0=1.5)

    assert net.n == 0
    np.testing.assert_array_equal(net.evaluate(np.random.default_rng(0).random((5, 2))), np.full(5, 1.5))


def test_evaluate_batch_matches_single_points() -> None:
    rng = np.random.default_rng(1)
    net = RepuNetwork(2, rng.standard_normal(4), rng.standard_normal((4, 3)), rng.standard_normal(4), a0=0.3)
    X = rng.random((7, 3))

    batch = net.evaluate(X)

    assert isinstance(batch, np.ndarray)
    np.testing.assert_allclose(batch, [net.evaluate(x) for x in X], rtol=1e-14)


def test_evaluate_dimension_mismatch() -> None:
    net = RepuNetwork.from_neurons(2, 2, [(1.0, (1.0, 0.0), 0.0)])

    with pytest.raises(DimensionMismatchError):
        net.evaluate((0.1, 0.2, 0.3))


@pytest.mark.parametrize(
    ("neuron", "alpha", "x", "expected"),
    [
        ((1.0, (3.0, 1.0), 0.0), (1, 0), (1.0, 1.0), 24.0),
        ((1.0, (1.0, 0.0), -2.0), (1, 0), (0.5, 0.5), 0.0),
        ((1.0, (2.0, 1.0), 0.0), (1, 1), (0.5, 0.5), 4.0),
    ],
)
def test_derivative(
    neuron: tuple[float, tuple[float, float], float], alpha: tuple[int, int], x: tuple[float, float], expected: float
) -> None:
    net = RepuNetwork.from_neurons(2, 2, [neuron])

    assert net.derivative(alpha, x) == pytest.approx(expected)


def test_zeroth_derivative_is_evaluation() -> None:
    rng = np.random.default_rng(2)
    net = RepuNetwork(3, rng.standard_normal(5), rng.standard_normal((5, 2)), rng.standard_normal(5), a0=-0.4)
    X = rng.random((10, 2))

    np.testing.assert_array_equal(net.derivative((0, 0), X), net.evaluate(X))


def test_derivative_above_k_is_unsupported() -> None:
    net = RepuNetwork.from_neurons(2, 2, [(1.0, (1.0, 0.0), 0.0)])

    with pytest.raises(UnsupportedOrderError) as exc_info:
        net.derivative((2, 1), (0.5, 0.5))

    assert exc_info.value.order == 3
    assert exc_info.value.k == 2


def test_derivative_matches_finite_differences() -> None:
    rng = np.random.default_rng(3)
    net = RepuNetwork(3, rng.standard_normal(6), rng.standard_normal((6, 2)), rng.standard_normal(6))
    h = 1e-5
    for x in rng.random((20, 2)):
        for j in range(2):
            step = np.eye(2)[j] * h
            numeric = (net.evaluate(x + step) - net.evaluate(x - step)) / (2 * h)
            assert net.derivative(MultiIndex.unit(2, j), x) == pytest.approx(numeric, rel=1e-4, abs=1e-8)


def test_positive_homogeneity() -> None:
    rng = np.random.default_rng(4)
    net = RepuNetwork(2, rng.standard_normal(3), rng.standard_normal((3, 2)), rng.standard_normal(3))
    c = 3.7
    scaled = net.replace(a=net.a / c**2, w=net.w * c, b=net.b * c)
    X = rng.random((15, 2))

    np.testing.assert_allclose(scaled.evaluate(X), net.evaluate(X), rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(scaled.derivative((1, 0), X), net.derivative((1, 0), X), rtol=1e-12, atol=1e-14)


def test_with_scaling_keeps_function() -> None:
    rng = np.random.default_rng(5)
    net = RepuNetwork(2, rng.standard_normal(4), rng.standard_normal((4, 2)), rng.standard_normal(4))
    mean_field = net.with_scaling(Scaling.MEAN_FIELD)
    X = rng.random((10, 2))

    assert mean_field.scaling is Scaling.MEAN_FIELD
    np.testing.assert_allclose(mean_field.a, 4 * net.a)
    np.testing.assert_allclose(mean_field.evaluate(X), net.evaluate(X), rtol=1e-13)


def test_parameter_gradient() -> None:
    net = RepuNetwork.from_neurons(2, 2, [(1.0, (1.0, 0.0), 0.0)])

    grad = net.parameter_gradient((0.5, 0.0))

    np.testing.assert_allclose(grad.a, [0.25])
    np.testing.assert_allclose(grad.w, [[0.5, 0.0]])
    np.testing.assert_allclose(grad.b, [1.0])
    assert grad.a0 == 1.0


def test_parameter_gradient_vanishes_for_inactive_neuron() -> None:
    net = RepuNetwork.from_neurons(2, 2, [(1.0, (1.0, 0.0), -2.0)])

    grad = net.parameter_gradient((0.5, 0.5))

    assert not grad.a.any()
    assert not grad.w.any()
    assert not grad.b.any()


def test_parameter_gradient_matches_finite_differences() -> None:
    rng = np.random.default_rng(6)
    tail = Polynomial.basis(2, 2).with_coefs(rng.standard_normal(6))
    net = RepuNetwork(2, rng.standard_normal(3), rng.standard_normal((3, 2)), rng.standard_normal(3), tail=tail)
    x = rng.random(2)
    theta = net.parameters()
    h = 1e-5

    analytic = net.parameter_gradient(x).flat()

    for i in range(theta.size):
        step = np.zeros_like(theta)
        step[i] = h
        numeric = (net.with_parameters(theta + step).evaluate(x) - net.with_parameters(theta - step).evaluate(x)) / (
            2 * h
        )
        assert analytic[i] == pytest.approx(numeric, rel=1e-5, abs=1e-8)


def test_with_parameters_round_trip() -> None:
    rng = np.random.default_rng(7)
    net = RepuNetwork(2, rng.standard_normal(3), rng.standard_normal((3, 4)), rng.standard_normal(3), a0=0.5)

    again = net.with_parameters(net.parameters())

    np.testing.assert_array_equal(again.parameters(), net.parameters())


def test_with_parameters_rejects_wrong_length() -> None:
    net = RepuNetwork.from_neurons(2, 2, [(1.0, (1.0, 0.0), 0.0)])

    with pytest.raises(ValueError, match="Expected 5 parameters"):
        net.with_parameters(np.zeros(4))


def test_tail_degree_above_k_is_rejected() -> None:
    with pytest.raises(ValueError, match="degree 3"):
        RepuNetwork.from_neurons(2, 1, [], tail=Polynomial.from_terms(1, [(1.0, (3,))]))


def test_polynomial_differentiate() -> None:
    # p = 3 x1^2 x2 + x2
    poly = Polynomial.from_terms(2, [(3.0, (2, 1)), (1.0, (0, 1))])

    assert poly.derivative((1, 0), (2.0, 5.0)) == pytest.approx(60.0)
    assert poly.derivative((0, 1), (2.0, 5.0)) == pytest.approx(13.0)
    assert poly.derivative((2, 1), (2.0, 5.0)) == pytest.approx(6.0)
    assert poly.derivative((3, 0), (2.0, 5.0)) == 0.0


def test_permutation_invariance() -> None:
    rng = np.random.default_rng(8)
    net = RepuNetwork(2, rng.standard_normal(5), rng.standard_normal((5, 2)), rng.standard_normal(5))
    order = [3, 1, 4, 0, 2]
    permuted = net.replace(a=net.a[order], w=net.w[order], b=net.b[order])
    X = rng.random((10, 2))

    np.testing.assert_allclose(permuted.evaluate(X), net.evaluate(X), rtol=1e-13, atol=1e-15)
