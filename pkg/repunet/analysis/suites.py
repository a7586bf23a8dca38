"""Randomised property suites run by `repunet-lab check`.

Every suite draws its cases from named seed streams and returns a [`SuiteResult`][repunet.analysis.suites.SuiteResult]
with the number of cases and violations. `scale` shrinks or grows the number of random cases.
"""

#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import logging
import math
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from repunet._jobs import run_jobs
from repunet._random import stream
from repunet.analysis.constants import (
    barron_embedding_constant,
    barron_term_ratio,
    md_lower_bound_probe,
    variation_embedding_constant,
    variation_term_ratio,
)
from repunet.analysis.embedding import (
    check_embedding,
    dictionary_bound_check,
    interpolation_check,
    norm_relation_check,
    random_corpus,
)
from repunet.analysis.montecarlo import McMode, mc_construction, random_atoms
from repunet.datagen import NoiseKind, NoisyDataset
from repunet.network import FloatArray, Polynomial, RepuNetwork
from repunet.penalties import PenaltyKind, penalty_value
from repunet.quadrature import QuadratureSpec, build_rule
from repunet.solver import objective, objective_gradient

log = logging.getLogger("repunet:suites")

MD_BAND = (0.05, 20.0)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    cases: int
    violations: int
    detail: dict[str, Any] = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _count(base: int, scale: float) -> int:
    return max(1, round(base * scale))


def _rel_close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(abs(a), abs(b))


def constants_suite(seed: int, scale: float) -> SuiteResult:
    """Known values and the term ratio recursions for `d <= 50`, `k <= 4`."""
    cases = violations = 0
    for value, expected in ((barron_embedding_constant(2, 1, 2), 3.0), (variation_embedding_constant(2, 0, 2), 8.0)):
        cases += 1
        violations += value != expected
    worst = 0.0
    for d in range(1, 51):
        for k in range(1, 5):
            for s in range(k):
                barron = barron_term_ratio(d, s, k)
                expected_barron = (s + d) * (k - s) ** 2 / (s + 1)
                variation = variation_term_ratio(d, s, k)
                expected_variation = (s + d) * (k - s) ** 2 / (4 * (s + 1) * d)
                in_range = (k - 1 + d) / k * (1 - 1e-12) <= barron <= d * k**2 * (1 + 1e-12)
                cases += 3
                violations += not _rel_close(barron, expected_barron, 1e-12)
                violations += not _rel_close(variation, expected_variation, 1e-12)
                violations += not in_range
                worst = max(worst, abs(barron / expected_barron - 1), abs(variation / expected_variation - 1))
    return SuiteResult("constants", cases, violations, {"worst_relative_deviation": worst})


def _random_barron_net(rng: np.random.Generator, d: int, k: int) -> RepuNetwork:
    n = int(rng.integers(1, 9))
    return RepuNetwork(
        k, rng.standard_normal(n), rng.standard_normal((n, d)), rng.standard_normal(n), scaling="mean_field"
    )


def penalty_suite(seed: int, scale: float) -> SuiteResult:
    """Rescaling invariance of the extended Barron penalty, tail invariance of `radon_bv`, permutation invariance."""
    rng = stream(seed, "corpus", 10)
    cases = violations = 0
    for _ in range(_count(1000, scale)):
        d, k = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        net = _random_barron_net(rng, d, k)
        c = float(10 ** rng.uniform(-3, 3))
        scaled = net.replace(a=net.a / c**k, w=net.w * c, b=net.b * c)
        base = penalty_value(net, PenaltyKind.EXTENDED_BARRON)
        cases += 1
        violations += not _rel_close(penalty_value(scaled, PenaltyKind.EXTENDED_BARRON), base, 1e-12)

        order = rng.permutation(net.n)
        permuted = net.replace(a=net.a[order], w=net.w[order], b=net.b[order])
        cases += 1
        violations += not _rel_close(penalty_value(permuted, PenaltyKind.EXTENDED_BARRON), base, 1e-12)

    for net in random_corpus(_count(200, scale), 2, 2, PenaltyKind.RADON_BV, seed):
        tail = Polynomial.basis(2, 2)
        moved = net.replace(tail=tail.with_coefs(stream(seed, "corpus", 11).standard_normal(len(tail.coefs))))
        cases += 1
        violations += penalty_value(moved, PenaltyKind.RADON_BV) != penalty_value(net, PenaltyKind.RADON_BV)
    return SuiteResult("penalties", cases, violations)


def _finite_difference(
    net: RepuNetwork, dataset: NoisyDataset, kind: PenaltyKind, lam: float, step: float
) -> FloatArray:
    theta = net.parameters()
    grad = np.empty_like(theta)
    for i in range(theta.size):
        shift = np.zeros_like(theta)
        shift[i] = step
        plus = objective(net.with_parameters(theta + shift), dataset, kind, lam, check=False)
        minus = objective(net.with_parameters(theta - shift), dataset, kind, lam, check=False)
        grad[i] = (plus - minus) / (2 * step)
    return grad


def _away_from_zero(values: FloatArray, gap: float = 0.01) -> FloatArray:
    return np.where(np.abs(values) < gap, np.copysign(gap, values), values)


def _smooth_point(net: RepuNetwork, kind: PenaltyKind) -> RepuNetwork:
    """Moves the parameters where the penalty has a kink out of reach of the difference step."""
    net = net.replace(a=_away_from_zero(net.a))
    if kind is PenaltyKind.EXTENDED_BARRON:
        net = net.replace(w=_away_from_zero(net.w), b=_away_from_zero(net.b))
    return net


def random_dataset(d: int, rng: np.random.Generator, q: int = 4) -> NoisyDataset:
    """Standard normal values on a tensor Gauss rule."""
    rule = build_rule(QuadratureSpec(q=q), d)
    return NoisyDataset(rule.nodes, rng.standard_normal(rule.size), rule.weights, 0.0, 0.0, 0, NoiseKind.GAUSSIAN_IID)


def gradient_suite(seed: int, scale: float) -> SuiteResult:
    """Analytic objective gradients against central differences at random feasible points."""
    rng = stream(seed, "corpus", 20)
    cases = violations = 0
    worst = 0.0
    kinds = list(PenaltyKind)
    for idx in range(_count(200, scale)):
        d, k = int(rng.integers(1, 4)), int(rng.integers(2, 4))
        kind = kinds[idx % len(kinds)]
        net = _smooth_point(
            _random_barron_net(rng, d, k)
            if kind is PenaltyKind.EXTENDED_BARRON
            else random_corpus(1, d, k, kind, seed + idx)[0],
            kind,
        )
        dataset = random_dataset(d, rng)
        lam = float(rng.uniform(0.01, 1.0))
        analytic = objective_gradient(net, dataset, kind, lam).flat()
        numeric = _finite_difference(net, dataset, kind, lam, 1e-5)
        error = float(np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic), 1e-8))
        worst = max(worst, error)
        cases += 1
        violations += error > 1e-4  # noqa: PLR2004
    return SuiteResult("gradient", cases, violations, {"worst_relative_error": worst})


def embedding_suite(seed: int, scale: float) -> SuiteResult:
    """`||net||_{H^m} <= constant * penalty` for random mean-field and unit-sphere networks, `d` in {2, 3}."""
    cases = violations = 0
    worst = 0.0
    for d in (2, 3):
        rule = build_rule(QuadratureSpec.default_for(d, seed), d)
        for kind in (PenaltyKind.EXTENDED_BARRON, PenaltyKind.VARIATION):
            for net in random_corpus(_count(200, scale), d, 2, kind, seed + d):
                for m in range(3):
                    result = check_embedding(net, m, rule)
                    cases += 1
                    violations += not result.passed
                    if result.bound > 0:
                        worst = max(worst, result.norm / result.bound)
    return SuiteResult("embedding", cases, violations, {"largest_norm_to_bound": worst})


def md_probe_suite(seed: int, scale: float) -> SuiteResult:
    """The probe times `d^(k/2)` stays in a fixed band for `d = 2..30`, `k = 2`."""
    low, high = MD_BAND
    cases = violations = 0
    scaled = []
    for d in range(2, 31):
        probe = md_lower_bound_probe(d, 2)
        value = probe.value * d
        scaled.append(value)
        cases += 2
        violations += not low <= value <= high
        violations += abs(probe.l2_norm - probe.l2_norm_analytic) > 1e-10  # noqa: PLR2004
    return SuiteResult("md_probe", cases, violations, {"min": min(scaled), "max": max(scaled)})


def interpolation_suite(seed: int, scale: float) -> SuiteResult:
    """Finite interpolation constant for `m = 1`; ratios exactly one for `m = 0` and `m = k`."""
    rule = build_rule(QuadratureSpec.default_for(2, seed), 2)
    nets = random_corpus(_count(500, scale), 2, 2, PenaltyKind.VARIATION, seed)
    report = interpolation_check(nets, 1, 2, rule)
    cases, violations = 1, int(not (math.isfinite(report.k_fit) and report.k_fit < 10 * report.median))
    sample = nets[: _count(50, scale)]
    for m in (0, 2):
        edge = interpolation_check(sample, m, 2, rule)
        cases += edge.ratios.size
        violations += int(np.count_nonzero(edge.ratios != 1.0))
    return SuiteResult("interpolation", cases, violations, {"k_fit": report.k_fit, "median": report.median})


def norm_relation_suite(seed: int, scale: float) -> SuiteResult:
    cases = violations = 0
    worst = 0.0
    for d in (2, 4, 8):
        report = norm_relation_check(random_corpus(_count(1000, scale), d, 2, PenaltyKind.VARIATION, seed + d))
        cases += report.ratios.size
        violations += report.violations
        worst = max(worst, float(np.max(report.ratios / report.bounds)))
    return SuiteResult("norm_relation", cases, violations, {"largest_ratio_to_bound": worst})


def dictionary_suite(seed: int, scale: float) -> SuiteResult:
    report = dictionary_bound_check(_count(1000, scale), 2, build_rule(QuadratureSpec.default_for(2, seed), 2), seed)
    violations = int(np.count_nonzero(report.norms > report.bound))
    return SuiteResult("dictionary", report.norms.size, violations, {"max_ratio": report.max_ratio})


def montecarlo_suite(seed: int, scale: float) -> SuiteResult:
    """Sampling error of a 10-atom target decays like `n^(-1/2)` and stays below its ceiling."""
    rule = build_rule(QuadratureSpec.default_for(2, seed), 2)
    atoms = random_atoms(10, 2, seed)
    report = mc_construction(
        atoms, [16, 32, 64, 128, 256, 512, 1024], max(2, _count(200, scale)), rule, McMode.VARIATION, 2, seed
    )
    slope = report.slope.slope if report.slope else math.nan
    violations = sum(not point.below_ceiling for point in report.points)
    violations += int(not -0.6 <= slope <= -0.4)  # noqa: PLR2004
    return SuiteResult("montecarlo", len(report.points) + 1, violations, {"slope": slope})


SUITES: dict[str, Callable[[int, float], SuiteResult]] = {
    "constants": constants_suite,
    "penalties": penalty_suite,
    "gradient": gradient_suite,
    "embedding": embedding_suite,
    "md_probe": md_probe_suite,
    "interpolation": interpolation_suite,
    "norm_relation": norm_relation_suite,
    "dictionary": dictionary_suite,
    "montecarlo": montecarlo_suite,
}
DEFAULT_SUITES = tuple(name for name in SUITES if name != "montecarlo")


def run_suites(names: Sequence[str], seed: int = 0, scale: float = 1.0, jobs: int = 1) -> list[SuiteResult]:
    """Runs the named suites, on up to `jobs` threads, in the given order."""
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        msg = f"Unknown suites: {', '.join(unknown)} (available: {', '.join(SUITES)})"
        raise ValueError(msg)

    def run(name: str) -> SuiteResult:
        started = time.perf_counter()
        result = SUITES[name](seed, scale)
        elapsed = time.perf_counter() - started
        log.info("Suite %s: %d cases, %d violations (%.1fs)", name, result.cases, result.violations, elapsed)
        return SuiteResult(result.name, result.cases, result.violations, result.detail, elapsed)

    return run_jobs(run, names, jobs)
