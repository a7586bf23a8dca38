"""Closed-form embedding constants.

For `0 <= s <= k` let

    C_s = binom(s + d - 1, s) * (k! / (k - s)!)^2
    I_s = C_s * (2 sqrt(d))^(2 (k - s))

The Sobolev norm of order `m` of a mean-field network is bounded by `sqrt(sum_{s <= m} C_s)` times its extended
Barron penalty, and that of a unit-sphere network by `sqrt(sum_{s <= m} I_s)` times its variation penalty.

The constants are summed exactly in integer arithmetic. The log-space term functions exist for recursion checks at
large `d`.
"""

#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.

import math
from collections.abc import Sequence
from dataclasses import dataclass

import pandas as pd
from scipy.special import gammaln

from repunet.errors import DomainError
from repunet.network import Polynomial
from repunet.quadrature import QuadratureRule, QuadratureSpec, build_rule, l2_norm, sobolev_profile


def _check_orders(d: int, m: int, k: int) -> None:
    if d < 1:
        msg = f"d must be at least 1, got {d}"
        raise DomainError(msg)
    if not 0 <= m <= k:
        msg = f"m must satisfy 0 <= m <= k, got m={m}, k={k}"
        raise DomainError(msg)


def barron_term(d: int, s: int, k: int) -> int:
    """Exact `C_s`."""
    _check_orders(d, s, k)
    return math.comb(s + d - 1, s) * math.perm(k, s) ** 2


def variation_term(d: int, s: int, k: int) -> int:
    """Exact `I_s`; `(2 sqrt(d))^2 = 4d` keeps it integral."""
    return barron_term(d, s, k) * (4 * d) ** (k - s)


def log_barron_term(d: int, s: int, k: int) -> float:
    _check_orders(d, s, k)
    log_multiplicity = gammaln(s + d) - gammaln(d) - gammaln(s + 1)
    log_falling = gammaln(k + 1) - gammaln(k - s + 1)
    return float(log_multiplicity + 2.0 * log_falling)


def log_variation_term(d: int, s: int, k: int) -> float:
    return log_barron_term(d, s, k) + 2.0 * (k - s) * math.log(2.0 * math.sqrt(d))


def barron_term_ratio(d: int, s: int, k: int) -> float:
    """`C_{s+1} / C_s` computed in log space, which stays finite for large `d` and `k`."""
    return math.exp(log_barron_term(d, s + 1, k) - log_barron_term(d, s, k))


def variation_term_ratio(d: int, s: int, k: int) -> float:
    return math.exp(log_variation_term(d, s + 1, k) - log_variation_term(d, s, k))


def barron_embedding_constant(d: int, m: int, k: int) -> float:
    """`C(d, m, k) = sqrt(sum_{s <= m} C_s)`.

    >>> barron_embedding_constant(2, 1, 2)
    3.0

    Raises:
        DomainError: If `m > k`.
    """
    _check_orders(d, m, k)
    return math.sqrt(sum(barron_term(d, s, k) for s in range(m + 1)))


def variation_embedding_constant(d: int, m: int, k: int) -> float:
    """`c~(d, m, k) = sqrt(sum_{s <= m} I_s)`.

    >>> variation_embedding_constant(2, 0, 2)
    8.0
    """
    _check_orders(d, m, k)
    return math.sqrt(sum(variation_term(d, s, k) for s in range(m + 1)))


def shifted_power_seminorm_sq(k: int, j: int) -> float:
    """`||d^j/dx^j (x - 1/2)^k||^2_{L^2(0, 1)}`."""
    r = k - j
    return math.perm(k, j) ** 2 * 0.5 ** (2 * r) / (2 * r + 1)


@dataclass(frozen=True)
class MdProbe:
    """Lower bound on `M(d)` from the polynomial `(x_1 - 1/2)^k`."""

    d: int
    k: int
    value: float
    """`||p||_{H^k} / (c~(d, k, k) ||p||_{L^2})` by quadrature."""
    analytic_value: float
    l2_norm: float
    """Quadrature `||p||_{L^2}`."""
    l2_norm_analytic: float
    hk_norm: float


def md_lower_bound_probe(d: int, k: int, rule: QuadratureRule | None = None) -> MdProbe:
    """Evaluates the probe polynomial `p(x) = (x_1 - 1/2)^k` against the variation embedding constant.

    Without a `rule`, the norms are computed with a one-dimensional Gauss rule in `x_1`, which is exact because `p`
    depends on `x_1` only and all other partial derivatives vanish.

    Raises:
        DomainError: If `d < 2`.
    """
    if d < 2:  # noqa: PLR2004
        msg = f"The probe needs d >= 2, got {d}"
        raise DomainError(msg)
    if rule is None:
        poly = Polynomial.shifted_power(1, 0, 0.5, k)
        rule = build_rule(QuadratureSpec(q=k + 2), 1)
    else:
        poly = Polynomial.shifted_power(rule.d, 0, 0.5, k)
    constant = variation_embedding_constant(d, k, k)
    l2 = l2_norm(poly, rule)
    hk = sobolev_profile(poly, k, rule).norm(k)
    l2_exact = math.sqrt(shifted_power_seminorm_sq(k, 0))
    hk_exact = math.sqrt(sum(shifted_power_seminorm_sq(k, j) for j in range(k + 1)))
    return MdProbe(
        d=d,
        k=k,
        value=hk / (constant * l2),
        analytic_value=hk_exact / (constant * l2_exact),
        l2_norm=l2,
        l2_norm_analytic=l2_exact,
        hk_norm=hk,
    )


def constants_table(d: int, k: int, orders: Sequence[int]) -> pd.DataFrame:
    """One row `(d, k, m, C, c~, probe)` per order `m`; the probe column is empty for `d = 1`."""
    for m in orders:
        _check_orders(d, m, k)
    probe = md_lower_bound_probe(d, k).value if d >= 2 else math.nan  # noqa: PLR2004
    return pd.DataFrame(
        {
            "d": d,
            "k": k,
            "m": list(orders),
            "barron_constant": [barron_embedding_constant(d, m, k) for m in orders],
            "variation_constant": [variation_embedding_constant(d, m, k) for m in orders],
            "md_probe": probe,
        }
    )
