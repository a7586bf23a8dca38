#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import math
from pathlib import Path
from typing import Any

import numpy as np
import pytest
import yaml
from pydantic import ValidationError

from repunet.analysis.rates import (
    RateReport,
    SweepAxis,
    SweepConfig,
    fit_slope,
    l2_bound_barron,
    l2_bound_variation,
    monotone_within_bars,
    rate_envelope,
    rate_sweep,
)
from repunet.penalties import PenaltyKind

EXPERIMENTS = Path(__file__).parents[3] / "experiments"


def make_sweep(**kwargs: Any) -> SweepConfig:
    settings: dict[str, Any] = {
        "axis": "n",
        "grid": [2, 4],
        "tikhonov": {
            "penalty": "extended_barron",
            "n": 2,
            "lambda_rule": {"rule": "explicit", "value": 1e-4},
            "optimizer": {"max_iters": 40, "restarts": 1},
        },
        "target": {"k": 2, "d": 1, "n_ref": 2},
        "training": {"kind": "gauss_legendre", "q": 8},
        "evaluation": {"kind": "gauss_legendre", "q": 8},
    }
    settings.update(kwargs)
    return SweepConfig.model_validate(settings)


def test_fit_slope_of_power_law() -> None:
    x = [1.0, 4.0, 16.0, 64.0]
    fitted = fit_slope(x, [2.0 * v**-0.5 for v in x])

    assert fitted is not None
    assert fitted.slope == pytest.approx(-0.5)
    assert fitted.intercept == pytest.approx(math.log(2.0))
    assert fitted.stderr == pytest.approx(0.0, abs=1e-12)


def test_fit_slope_ignores_unusable_points() -> None:
    fitted = fit_slope([1.0, 2.0, 3.0, 4.0], [1.0, 0.0, math.nan, 4.0])

    assert fitted is not None
    assert fitted.slope == pytest.approx(1.0)


@pytest.mark.parametrize(("x", "y"), [([1.0], [1.0]), ([1.0, 2.0], [0.0, 1.0]), ([2.0, 2.0], [1.0, 3.0])])
def test_fit_slope_needs_two_points(x: list[float], y: list[float]) -> None:
    assert fit_slope(x, y) is None


@pytest.mark.parametrize(
    ("kind", "delta", "n", "m", "epsilon", "expected"),
    [
        (PenaltyKind.EXTENDED_BARRON, 0.0, 4, 0, 0.0, 0.5),
        (PenaltyKind.EXTENDED_BARRON, 0.0, 4, 1, 0.0, math.sqrt(0.5)),
        (PenaltyKind.VARIATION, 0.5, 4, 2, 0.0, 1.0),
        (PenaltyKind.RADON_BV, 0.01, 4, 0, 1e-4, 0.02),
        (PenaltyKind.RADON_BV, 0.01, 4, 1, 1e-4, math.sqrt(0.02)),
    ],
)
def test_rate_envelope(kind: PenaltyKind, delta: float, n: int, m: int, epsilon: float, expected: float) -> None:
    assert rate_envelope(kind, delta, n, 2, m, epsilon) == pytest.approx(expected)


def test_l2_bounds() -> None:
    assert l2_bound_barron(0.1, 4, 1.0, 4.0) == pytest.approx(6.3)
    assert l2_bound_variation(0.0, 16, 0.5, 1, 4) == pytest.approx(1.5)


def test_theory_exponents() -> None:
    def report(axis: SweepAxis) -> RateReport:
        return RateReport(axis, PenaltyKind.EXTENDED_BARRON, 2, 2, (), (None, None, None))

    assert report(SweepAxis.DELTA).theory_exponents == (1.0, 0.5, 0.0)
    assert report(SweepAxis.N).theory_exponents == (-0.5, -0.25, -0.0)
    assert report(SweepAxis.D).theory_exponents == (None, None, None)


@pytest.mark.parametrize(
    ("changes", "match"),
    [
        ({"grid": [2.5, 4]}, "must be integers"),
        ({"m_max": 3}, "exceeds k=2"),
        ({"grid": []}, "at least 1 item"),
    ],
)
def test_invalid_sweep(changes: dict[str, Any], match: str) -> None:
    with pytest.raises(ValidationError, match=match):
        make_sweep(**changes)


def test_sweep_orders_default() -> None:
    assert make_sweep().orders == 2
    assert make_sweep(m_max=1).orders == 1


def test_monotone_within_bars() -> None:
    assert monotone_within_bars([3.0, 2.0, 2.05], [0.0, 0.03, 0.03])
    assert not monotone_within_bars([3.0, 2.0, 2.1], [0.0, 0.03, 0.03])
    assert monotone_within_bars([], [])


def test_rate_sweep_over_neurons() -> None:
    report = rate_sweep(make_sweep())

    assert report.axis is SweepAxis.N
    assert report.grid == [2.0, 4.0]
    assert report.failures == 0
    assert [point.n for point in report.points] == [2, 4]
    for point in report.points:
        assert point.errors.shape == (3,)
        assert np.all(np.isfinite(point.errors))
        assert np.all(np.diff(point.errors) >= 0.0)
        assert point.norm_hint > 0

    frame = report.to_frame()
    assert {"n", "lambda", "error_m0", "error_bar_m2", "bound_ratio_m1", "l2_bound_ratio"} <= set(frame.columns)
    assert len(frame) == 2

    summary = report.summary()
    assert summary["points"] == 2
    assert [order["theory_exponent"] for order in summary["orders"]] == [-0.5, -0.25, -0.0]


def test_rate_sweep_over_dimension() -> None:
    report = rate_sweep(make_sweep(axis="d", grid=[1, 2], training={"kind": "gauss_legendre", "q": 4}))

    assert [point.d for point in report.points] == [1, 2]
    assert report.theory_exponents == (None, None, None)
    assert all(np.all(np.isfinite(point.errors)) for point in report.points)


def test_rate_sweep_does_not_depend_on_jobs() -> None:
    config = make_sweep(axis="delta", grid=[0.01, 0.1])

    serial = rate_sweep(config, jobs=1)
    threaded = rate_sweep(config, jobs=2)

    for a, b in zip(serial.points, threaded.points, strict=True):
        np.testing.assert_array_equal(a.errors, b.errors)


def load_experiment(name: str) -> SweepConfig:
    with (EXPERIMENTS / name).open() as file:
        return SweepConfig.model_validate(yaml.safe_load(file)["sweep"])


@pytest.mark.parametrize("name", ["barron_delta_sweep.yaml", "variation_delta_sweep.yaml", "radon_bv_delta_sweep.yaml"])
def test_experiment_configs_are_valid(name: str) -> None:
    config = load_experiment(name)

    assert config.axis is SweepAxis.DELTA
    assert config.grid == [0.001, 0.003, 0.01, 0.03, 0.1]
    assert config.tikhonov.n == 256
    assert config.orders == 1


@pytest.mark.slow
def test_barron_delta_sweep() -> None:
    report = rate_sweep(load_experiment("barron_delta_sweep.yaml"), jobs=5)

    assert report.failures == 0
    l2_slope = report.slopes[0]
    assert l2_slope is not None
    assert l2_slope.slope >= 0.8
    assert report.bound_ratio_spread(1) <= 10.0
    for point in report.points:
        assert point.penalty <= 3.0 * point.norm_hint


@pytest.mark.slow
@pytest.mark.parametrize("name", ["variation_delta_sweep.yaml", "radon_bv_delta_sweep.yaml"])
def test_unit_sphere_delta_sweep(name: str) -> None:
    config = load_experiment(name)

    # fit() rejects networks that leave the unit sphere or the bias interval
    report = rate_sweep(config, jobs=5)

    assert report.failures == 0
    shrinking = sorted(report.points, key=lambda point: point.delta, reverse=True)
    assert monotone_within_bars([p.errors[0] for p in shrinking], [p.error_bars[0] for p in shrinking])
    if config.tikhonov.penalty is PenaltyKind.RADON_BV:
        assert all(p.epsilon_achieved <= config.tikhonov.epsilon_target for p in report.points)
