"""Tikhonov regularisation with shallow RePU networks.

The solver minimises

    J(g) = sum_i w_i (g(x_i) - y_i)^2 + lambda * P(g)^2

over networks with `n` neurons by projected subgradient descent with restarts and periodic exact solves for the
outer weights, where `(x_i, w_i, y_i)` are the points, weights and noisy values of a dataset and `P` is one of the
penalties of [`repunet.penalties`].
"""

#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import logging
import math
import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Annotated, Literal, Self

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    model_validator,
)

from repunet._jobs import run_jobs
from repunet._random import stream
from repunet.datagen import NoisyDataset
from repunet.errors import ConfigError, DimensionMismatchError, DivergenceError, UnsupportedOrderError
from repunet.network import (
    FloatArray,
    MultiIndex,
    NetworkGradient,
    Polynomial,
    RepuNetwork,
    Scaling,
    _as_alpha,
    _as_points,
    sigma,
)
from repunet.penalties import (
    PenaltyKind,
    check_constraints,
    dictionary_bounds,
    outer_weight_costs,
    penalty_subgradient,
    penalty_value,
    project_constraints,
)

log = logging.getLogger("repunet:solver")

TIE_TOLERANCE = 1e-12
_MIN_SHARE = 1e-10


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Schedule(StrEnum):
    CONSTANT = "constant"
    COSINE = "cosine"


class OptimizerConfig(_StrictModel):
    step_size: PositiveFloat = 0.05
    schedule: Schedule = Schedule.COSINE
    max_iters: PositiveInt = 2000
    restarts: PositiveInt = 4
    seed: int = 0
    tolerance: NonNegativeFloat = 0.0
    """Stop a run once a step moves the parameters by less than this; zero disables early stopping."""
    clip_norm: PositiveFloat | None = 1.0
    """Gradients longer than this are scaled down to this length before stepping."""
    momentum: Annotated[float, Field(ge=0.0, lt=1.0)] = 0.0
    init_radius: PositiveFloat = 1.0
    """Length of the initial inner weights of mean-field networks."""
    reference_factor: PositiveInt = 10
    """Length of the `radon_bv` reference run as a multiple of `max_iters`."""
    refit_every: NonNegativeInt = 50
    """Every this many iterations, and after the last one, the outer weights are re-solved with the inner weights
    held fixed (see [`refit_outer`][repunet.solver.refit_outer]); zero turns refitting off."""
    refit_sweeps: PositiveInt = 30
    log_every: PositiveInt = 500

    def step(self, iteration: int, total: int) -> float:
        """Step size of the zero-based `iteration` out of `total`."""
        if self.schedule is Schedule.CONSTANT:
            return self.step_size
        return self.step_size * 0.5 * (1.0 + math.cos(math.pi * iteration / total))


class ExplicitRule(_StrictModel):
    rule: Literal["explicit"] = "explicit"
    value: NonNegativeFloat


class BarronRule(_StrictModel):
    """`sqrt(lambda) = delta / H + C(k) / sqrt(n)`."""

    rule: Literal["barron"] = "barron"


class VariationRule(_StrictModel):
    """`sqrt(lambda) = delta / H + 2^k d^(k/2) / sqrt(n)`."""

    rule: Literal["variation"] = "variation"


class RadonBVRule(_StrictModel):
    """`sqrt(lambda) = (delta + sqrt(epsilon)) / H`."""

    rule: Literal["radon_bv"] = "radon_bv"


class GridRule(_StrictModel):
    """Fits every value and keeps the largest one that satisfies the discrepancy principle."""

    rule: Literal["grid"] = "grid"
    values: Annotated[list[PositiveFloat], Field(min_length=1)]


LambdaRule = Annotated[
    ExplicitRule | BarronRule | VariationRule | RadonBVRule | GridRule,
    Field(discriminator="rule"),
]

_RULE_PENALTY = {
    "barron": PenaltyKind.EXTENDED_BARRON,
    "variation": PenaltyKind.VARIATION,
    "radon_bv": PenaltyKind.RADON_BV,
}


class TikhonovConfig(_StrictModel):
    """Configuration of one Tikhonov fit (`tikhonov.*` config keys)."""

    penalty: PenaltyKind
    n: PositiveInt
    """Neuron budget."""
    k: PositiveInt = 2
    lambda_rule: LambdaRule
    norm_hint: PositiveFloat | None = None
    """Upper bound on the norm of the unknown function, required by the `barron`, `variation` and `radon_bv` rules."""
    delta: NonNegativeFloat = 0.0
    epsilon_target: NonNegativeFloat = 0.0
    """Optimisation slack `epsilon` of the `radon_bv` scheme."""
    barron_constant: PositiveFloat | None = None
    """`C(k)` of the Barron rule; defaults to `2^k (k + 1)`.

    At the default the `C(k) / sqrt(n)` term dominates `delta / H` for a few hundred neurons (`12 / 16 = 0.75` at
    `k = 2`, `n = 256`), so lambda barely moves with `delta`. Noise-level sweeps set a small constant instead.
    """
    discrepancy_tau: PositiveFloat = 1.5
    optimizer: OptimizerConfig = OptimizerConfig()

    @model_validator(mode="after")
    def _check_rule(self) -> Self:
        required = _RULE_PENALTY.get(self.lambda_rule.rule)
        if required is not None and required is not self.penalty:
            msg = f"lambda_rule '{self.lambda_rule.rule}' requires penalty '{required}', got '{self.penalty}'"
            raise ValueError(msg)
        return self


def default_barron_constant(k: int) -> float:
    """`C(k) = 2^k (k + 1)`.

    >>> default_barron_constant(2)
    12.0
    """
    return 2.0**k * (k + 1)


def select_lambda(
    rule: ExplicitRule | BarronRule | VariationRule | RadonBVRule,
    delta: float,
    n: int,
    norm_hint: float | None,
    k: int,
    d: int,
    *,
    epsilon: float = 0.0,
    barron_constant: float | None = None,
) -> float:
    """Computes the regularisation parameter prescribed by `rule`.

    >>> round(select_lambda(BarronRule(), 0.01, 100, 2.0, 2, 2, barron_constant=1.0), 12)
    0.011025
    >>> round(select_lambda(RadonBVRule(), 0.1, 10, 1.0, 2, 2, epsilon=0.04), 12)
    0.09

    Raises:
        ConfigError: If a norm-based rule gets no positive `norm_hint`.
    """
    if isinstance(rule, ExplicitRule):
        return rule.value
    if isinstance(rule, GridRule):
        msg = "A grid has no single lambda; fit every grid value instead"
        raise ConfigError(msg)
    if norm_hint is None or not norm_hint > 0:
        msg = f"norm_hint must be positive for lambda_rule '{rule.rule}', got {norm_hint}"
        raise ConfigError(msg)

    if isinstance(rule, BarronRule):
        constant = default_barron_constant(k) if barron_constant is None else barron_constant
        root = delta / norm_hint + constant / math.sqrt(n)
    elif isinstance(rule, VariationRule):
        root = delta / norm_hint + 2.0**k * d ** (k / 2) / math.sqrt(n)
    else:
        root = (delta + math.sqrt(epsilon)) / norm_hint
    return root**2


@dataclass(frozen=True)
class ObjectiveTerms:
    fidelity_sq: float
    penalty: float
    lam: float

    @property
    def fidelity(self) -> float:
        return math.sqrt(self.fidelity_sq)

    @property
    def value(self) -> float:
        return self.fidelity_sq + self.lam * self.penalty**2


def _check_dimension(net: RepuNetwork, dataset: NoisyDataset) -> None:
    if net.d != dataset.d:
        raise DimensionMismatchError(net.d, dataset.d)


def objective_terms(
    net: RepuNetwork, dataset: NoisyDataset, penalty: PenaltyKind, lam: float, *, check: bool = True
) -> ObjectiveTerms:
    _check_dimension(net, dataset)
    residual = np.asarray(net.evaluate(dataset.sample_points)) - dataset.values
    fidelity_sq = float(np.sum(dataset.training_weights * residual**2))
    return ObjectiveTerms(fidelity_sq, penalty_value(net, penalty, check=check), lam)


def objective(
    net: RepuNetwork, dataset: NoisyDataset, penalty: PenaltyKind, lam: float, *, check: bool = True
) -> float:
    """Evaluates the Tikhonov functional with the dataset's training weights.

    Raises:
        ConstraintError: If `net` is not in the network class of `penalty` and `check` is set.
    """
    return objective_terms(net, dataset, penalty, lam, check=check).value


def objective_gradient(
    net: RepuNetwork, dataset: NoisyDataset, penalty: PenaltyKind, lam: float, *, check: bool = True
) -> NetworkGradient:
    """Subgradient of [`objective`][repunet.solver.objective] with respect to all network parameters."""
    _check_dimension(net, dataset)
    residual = np.asarray(net.evaluate(dataset.sample_points)) - dataset.values
    grad = net.pullback(dataset.sample_points, 2.0 * dataset.training_weights * residual)
    if lam == 0.0:
        return grad
    pen = penalty_value(net, penalty, check=check)
    return grad + penalty_subgradient(net, penalty, check=False).scaled(2.0 * lam * pen)


@dataclass(frozen=True)
class GridPoint:
    lam: float
    fidelity: float
    penalty: float
    objective: float


@dataclass(frozen=True, eq=False)
class FitReport:
    """Result of [`fit`][repunet.solver.fit]."""

    network: RepuNetwork
    penalty_kind: PenaltyKind
    objective: float
    fidelity: float
    """Data fidelity `||g - f^delta||` (unsquared) under the training weights."""
    penalty: float
    lam: float
    iterations: int
    restart: int
    """Index of the restart the network comes from."""
    epsilon_achieved: float
    """Distance of the returned objective from the best objective seen across restarts and the reference run."""
    wall_time: float
    restart_objectives: tuple[float, ...] = ()
    trace: FloatArray = field(default_factory=lambda: np.zeros(0))
    """Best-so-far objective per iteration of the chosen restart."""
    grid: tuple[GridPoint, ...] = ()


@dataclass(frozen=True, eq=False)
class _RunResult:
    network: RepuNetwork
    terms: ObjectiveTerms
    iterations: int
    trace: FloatArray


def _weighted_lstsq(design: FloatArray, dataset: NoisyDataset) -> FloatArray:
    root = np.sqrt(dataset.training_weights)
    coefs, *_ = np.linalg.lstsq(design * root[:, None], dataset.values * root, rcond=None)
    return coefs


def initial_network(dataset: NoisyDataset, config: TikhonovConfig, restart: int) -> RepuNetwork:
    """Random initial network of restart `restart`.

    Inner weights are uniform on the sphere (scaled by `init_radius` for mean-field networks), biases uniform in
    `[-sqrt(d), sqrt(d)]`, outer weights normal with variance `1/n`. The output bias starts at the weighted mean of
    the data, and for `radon_bv` the polynomial tail starts at the weighted least-squares fit of the data.
    """
    d, n = dataset.d, config.n
    rng = stream(config.optimizer.seed, "init", restart)
    w = rng.standard_normal((n, d))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    if config.penalty is PenaltyKind.EXTENDED_BARRON:
        w *= config.optimizer.init_radius
    c1, c2 = dictionary_bounds(d)
    b = rng.uniform(c1, c2, n)
    a = rng.normal(0.0, math.sqrt(1.0 / n), n)

    tail = None
    a0 = float(np.sum(dataset.training_weights * dataset.values))
    if config.penalty is PenaltyKind.RADON_BV:
        basis = Polynomial.basis(d, config.k)
        tail = basis.with_coefs(_weighted_lstsq(basis.monomials(dataset.sample_points), dataset))
        a0 = 0.0
    return RepuNetwork(config.k, a, w, b, a0=a0, scaling=config.penalty.scaling, tail=tail)


def refit_outer(
    net: RepuNetwork, dataset: NoisyDataset, penalty: PenaltyKind, lam: float, *, sweeps: int = 30
) -> RepuNetwork:
    """Re-solves the outer weights `a`, `a0` and the polynomial tail of `net` with `w` and `b` held fixed.

    With fixed inner weights the objective is a least-squares term plus `lam * (sum_i c_i |a_i|)^2`. The squared sum
    equals the minimum of `sum_i c_i^2 a_i^2 / s_i` over shares `s` on the probability simplex, attained at
    `s_i = c_i |a_i| / sum_j c_j |a_j|`. Every sweep updates the shares and then solves a weighted ridge system.
    The best iterate is returned, and `net` itself if no sweep lowers its objective.
    """
    _check_dimension(net, dataset)
    n = net.n
    X = dataset.sample_points
    columns = [net.scale * sigma(net.preactivation(X), net.k), np.ones((X.shape[0], 1))]
    if net.tail is not None:
        columns.append(net.tail.monomials(X))
    design = np.hstack(columns)
    weights = dataset.training_weights
    gram = design.T @ (weights[:, None] * design)
    rhs = design.T @ (weights * dataset.values)
    costs = outer_weight_costs(net, penalty)
    diagonal = np.arange(n)

    def value(coefs: FloatArray) -> float:
        residual = design @ coefs - dataset.values
        return float(np.sum(weights * residual**2)) + lam * float(np.sum(costs * np.abs(coefs[:n]))) ** 2

    tail = net.tail.coefs if net.tail is not None else np.zeros(0)
    start = np.concatenate([net.a, [net.a0], tail])
    best, best_value = start, value(start)
    coefs = start
    for _ in range(sweeps if lam > 0 else 1):
        system = gram.copy()
        if lam > 0 and n > 0:
            mass = costs * np.abs(coefs[:n])
            total = float(mass.sum())
            shares = mass / total if total > 0 else np.full(n, 1.0 / n)
            system[diagonal, diagonal] += lam * costs**2 / np.maximum(shares, _MIN_SHARE)
        try:
            coefs, *_ = np.linalg.lstsq(system, rhs, rcond=None)
        except np.linalg.LinAlgError:
            log.warning("Outer-weight refit of %d neurons did not converge; keeping the current weights", n)
            break
        current = value(coefs)
        if current < best_value:
            best, best_value = coefs, current

    if best is start:
        return net
    return net.replace(
        a=best[:n],
        a0=float(best[n]),
        tail=net.tail.with_coefs(best[n + 1 :]) if net.tail is not None else None,
    )


def _repair_degenerate(net: RepuNetwork, rng: np.random.Generator, kind: PenaltyKind) -> RepuNetwork:
    norms = np.linalg.norm(net.w, axis=1)
    dead = np.flatnonzero(norms == 0.0)
    if dead.size == 0:
        return net
    w = net.w.copy()
    for idx in dead:
        log.warning("Neuron %d has a zero inner weight under %s constraints; reinitialising it", idx, kind)
        direction = rng.standard_normal(net.d)
        w[idx] = direction / np.linalg.norm(direction)
    return net.replace(w=w)


def _optimise(
    start: RepuNetwork, dataset: NoisyDataset, config: TikhonovConfig, lam: float, restart: int, iterations: int
) -> _RunResult:
    """One projected subgradient run, interleaved with outer-weight refits, keeping the best iterate."""
    kind = config.penalty
    opt = config.optimizer
    repair_rng = stream(opt.seed, "init", restart, 1)
    net = project_constraints(start, kind)
    theta = net.parameters()
    velocity = np.zeros_like(theta)
    n_neuron_params = net.n * (net.d + 2)
    neuron_scale = float(net.n) if net.scaling is Scaling.MEAN_FIELD else 1.0

    best_net = net
    best = objective_terms(net, dataset, kind, lam)
    if not math.isfinite(best.value):
        raise DivergenceError(0, restart)
    trace = np.empty(iterations + 1)
    trace[0] = best.value
    done = iterations
    for it in range(iterations):
        grad = objective_gradient(net, dataset, kind, lam, check=False).flat()
        grad[:n_neuron_params] *= neuron_scale
        if opt.clip_norm is not None:
            grad /= max(1.0, float(np.linalg.norm(grad)) / opt.clip_norm)
        velocity = opt.momentum * velocity + grad
        step = opt.step(it, iterations) * velocity
        net = net.with_parameters(theta - step)
        if kind.unit_sphere:
            net = project_constraints(_repair_degenerate(net, repair_rng, kind), kind)
        theta = net.parameters()
        stop = opt.tolerance > 0 and float(np.linalg.norm(step)) < opt.tolerance

        current = objective_terms(net, dataset, kind, lam, check=False)
        if not math.isfinite(current.value):
            raise DivergenceError(it + 1, restart)
        if opt.refit_every and ((it + 1) % opt.refit_every == 0 or it + 1 == iterations or stop):
            net = refit_outer(net, dataset, kind, lam, sweeps=opt.refit_sweeps)
            theta = net.parameters()
            velocity = np.zeros_like(theta)
            current = objective_terms(net, dataset, kind, lam, check=False)
        if current.value < best.value:
            best, best_net = current, net
        trace[it + 1] = best.value
        if (it + 1) % opt.log_every == 0:
            log.debug(
                "Restart %d, iteration %d: objective %.6e (best %.6e)", restart, it + 1, current.value, best.value
            )
        if stop:
            done = it + 1
            break

    return _RunResult(best_net, best, done, trace[: done + 1])


@dataclass(frozen=True, eq=False)
class _LambdaFit:
    lam: float
    best: _RunResult
    restart: int
    epsilon: float
    restart_objectives: tuple[float, ...]


def _fit_lambda(dataset: NoisyDataset, config: TikhonovConfig, lam: float, jobs: int) -> _LambdaFit:
    """Runs all restarts for one lambda and keeps the best, lowest restart index first on ties."""
    opt = config.optimizer

    def run(restart: int) -> _RunResult:
        log.info("Restart %d of %d (lambda %.4e)", restart + 1, opt.restarts, lam)
        start = initial_network(dataset, config, restart)
        return _optimise(start, dataset, config, lam, restart, opt.max_iters)

    results = run_jobs(run, range(opt.restarts), jobs)

    chosen = 0
    for idx, result in enumerate(results):
        if result.terms.value < results[chosen].terms.value - TIE_TOLERANCE:
            chosen = idx
    best = results[chosen]

    epsilon = 0.0
    if config.penalty is PenaltyKind.RADON_BV:
        iterations = opt.reference_factor * opt.max_iters
        log.info("Reference run of %d iterations from restart %d", iterations, chosen)
        reference = _optimise(best.network, dataset, config, lam, opt.restarts, iterations)
        epsilon = max(best.terms.value - reference.terms.value, 0.0)

    return _LambdaFit(lam, best, chosen, epsilon, tuple(r.terms.value for r in results))


def fit(dataset: NoisyDataset, config: TikhonovConfig, *, jobs: int = 1) -> FitReport:
    """Minimises the Tikhonov functional over networks with `config.n` neurons.

    Restarts run on up to `jobs` threads; the result does not depend on `jobs`. With a `grid` rule every value is
    fitted and the largest lambda whose data fidelity stays within `discrepancy_tau * delta` is kept.

    Raises:
        ConfigError: If the lambda rule cannot be evaluated.
        DivergenceError: If the objective becomes non-finite.
    """
    started = time.perf_counter()
    rule = config.lambda_rule
    if isinstance(rule, GridRule):
        candidates = sorted(rule.values)
    else:
        candidates = [
            select_lambda(
                rule,
                config.delta,
                config.n,
                config.norm_hint,
                config.k,
                dataset.d,
                epsilon=config.epsilon_target,
                barron_constant=config.barron_constant,
            )
        ]
    log.info("Fitting %d %s neurons to %d points, lambda %s", config.n, config.penalty, dataset.size, candidates)

    fits = [_fit_lambda(dataset, config, lam, jobs) for lam in candidates]
    grid: tuple[GridPoint, ...] = ()
    selected = fits[0]
    if isinstance(rule, GridRule):
        grid = tuple(GridPoint(f.lam, f.best.terms.fidelity, f.best.terms.penalty, f.best.terms.value) for f in fits)
        delta = config.delta or dataset.delta_realized
        admissible = [f for f in fits if f.best.terms.fidelity <= config.discrepancy_tau * delta]
        if admissible:
            selected = admissible[-1]
        else:
            selected = min(fits, key=lambda f: f.best.terms.fidelity)
            log.warning("No lambda on the grid meets the discrepancy principle; using the smallest data misfit")

    best = selected.best
    report = FitReport(
        network=best.network,
        penalty_kind=config.penalty,
        objective=best.terms.value,
        fidelity=best.terms.fidelity,
        penalty=best.terms.penalty,
        lam=selected.lam,
        iterations=best.iterations,
        restart=selected.restart,
        epsilon_achieved=selected.epsilon,
        wall_time=time.perf_counter() - started,
        restart_objectives=selected.restart_objectives,
        trace=best.trace,
        grid=grid,
    )
    check_constraints(report.network, config.penalty)
    log.info(
        "Best objective %.6e from restart %d (fidelity %.4e, penalty %.4e)",
        report.objective,
        report.restart,
        report.fidelity,
        report.penalty,
    )
    return report


def differentiate(
    source: RepuNetwork | FitReport, points: ArrayLike, alphas: Sequence[MultiIndex | Sequence[int]]
) -> pd.DataFrame:
    """Tabulates `d^alpha` of a network at `points`, one column `d_<alpha>` per multi-index.

    Raises:
        UnsupportedOrderError: If some `|alpha| > k`; nothing is evaluated in that case.
    """
    net = source.network if isinstance(source, FitReport) else source
    parsed = [_as_alpha(alpha, net.d) for alpha in alphas]
    for alpha in parsed:
        if alpha.order > net.k:
            raise UnsupportedOrderError(alpha.order, net.k)
    X, _ = _as_points(points, net.d)
    frame = pd.DataFrame(X, columns=[f"x{j + 1}" for j in range(net.d)])
    for alpha in parsed:
        frame["d_" + "_".join(map(str, alpha.orders))] = net.derivative(alpha, X)
    return frame
