"""Closed-form hop-count bounds in terms of Euclidean distance.

Natural logarithms throughout. All quantities are plain double-precision
evaluations; applicability predicates compare computed doubles exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

GAMMA_LOG_COEF = 31.0
GAMMA_POLY_COEF = 70.0
GAMMA_CONST = 300.0 ** (2.0 / 3.0)
LOWER_DISTANCE_FACTOR = 20.0
UPPER_RADIUS_FACTOR = 70.0


@dataclass(frozen=True)
class BoundParams:
    n: float
    r: float
    d_E: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r}")
        if self.d_E < 0:
            raise ValueError(f"d_E must be nonnegative, got {self.d_E}")


@dataclass(frozen=True)
class GammaBreakdown:
    term_log: float
    term_poly: float
    term_const: float

    @property
    def gamma(self) -> float:
        return max(self.term_log, self.term_poly, self.term_const)

    @property
    def dominant(self) -> str:
        terms = {"log": self.term_log, "poly": self.term_poly, "const": self.term_const}
        return max(terms, key=terms.get)


def connectivity_threshold(n: float) -> float:
    """``sqrt(log n / pi)``."""
    if n <= 1:
        raise ValueError(f"connectivity threshold needs n > 1, got {n}")
    return math.sqrt(math.log(n) / math.pi)


def upper_applicability_radius(n: float) -> float:
    """Smallest radius for which the upper bound applies, ``70 sqrt(log n)``."""
    return UPPER_RADIUS_FACTOR * math.sqrt(math.log(n))


def gamma(params: BoundParams) -> GammaBreakdown:
    n, r, d = params.n, params.r, params.d_E
    log_n = math.log(n)
    term_log = GAMMA_LOG_COEF * (2.0 * r * log_n / (r + d)) ** (2.0 / 3.0)
    term_poly = GAMMA_POLY_COEF * log_n ** 2 / r ** (8.0 / 3.0)
    return GammaBreakdown(term_log, term_poly, GAMMA_CONST)


def lower_bound_hops(params: BoundParams) -> tuple[float, bool]:
    """``(d_E/r) * (1 + 1/(2 (r d_E)^{2/3}))`` and whether ``d_E >= 20 r log n``."""
    n, r, d = params.n, params.r, params.d_E
    applicable = d >= LOWER_DISTANCE_FACTOR * r * math.log(n)
    if d == 0:
        return 0.0, applicable
    value = (d / r) * (1.0 + 1.0 / (2.0 * (r * d) ** (2.0 / 3.0)))
    return value, applicable


def upper_bound_hops(params: BoundParams, gamma_value: Optional[float] = None) -> tuple[int, bool]:
    """``ceil((d_E/r) * (1 + gamma r^{-4/3}))`` and whether ``r >= 70 sqrt(log n)``."""
    n, r, d = params.n, params.r, params.d_E
    if gamma_value is None:
        gamma_value = gamma(params).gamma
    applicable = r >= upper_applicability_radius(n)
    value = math.ceil((d / r) * (1.0 + gamma_value * r ** (-4.0 / 3.0)))
    return int(value), applicable


@dataclass(frozen=True)
class DiameterBound:
    value: float
    ceiling: int
    applicable: bool
    gamma: GammaBreakdown
    d_E_used: float


def diameter_bound(n: float, r: float) -> DiameterBound:
    """``(sqrt(2n)/r) (1 + gamma r^{-4/3})`` with gamma evaluated at the diagonal ``d_E = sqrt(2n)``.

    gamma only decreases with ``d_E``, so the diagonal is the conservative choice.
    """
    diag = math.sqrt(2.0 * n)
    g = gamma(BoundParams(n, r, diag))
    value = (diag / r) * (1.0 + g.gamma * r ** (-4.0 / 3.0))
    return DiameterBound(value, math.ceil(value), r >= upper_applicability_radius(n), g, diag)


def reference_prior_diameter(n: float, r: float, c: float = 1.0) -> float:
    """``(sqrt(2n)/r) (1 + c sqrt(log log n / log n))``; ``c`` is a free constant."""
    if n < 16:
        raise ValueError(f"reference curve needs n >= 16 (log log n), got {n}")
    log_n = math.log(n)
    return (math.sqrt(2.0 * n) / r) * (1.0 + c * math.sqrt(math.log(log_n) / log_n))


@dataclass(frozen=True)
class BoundReport:
    params: BoundParams
    d_G_observed: Optional[int]
    gamma: GammaBreakdown
    lower_applicable: bool
    lower_value: float
    upper_applicable: bool
    upper_value: int
    lower_satisfied: Optional[bool]
    upper_satisfied: Optional[bool]

    def to_dict(self) -> dict:
        return {
            "n": self.params.n,
            "r": self.params.r,
            "d_E": self.params.d_E,
            "d_G": self.d_G_observed,
            "gamma": {
                "term_log": self.gamma.term_log,
                "term_poly": self.gamma.term_poly,
                "term_const": self.gamma.term_const,
            },
            "lower": {
                "applicable": self.lower_applicable,
                "value": self.lower_value,
                "satisfied": self.lower_satisfied,
            },
            "upper": {
                "applicable": self.upper_applicable,
                "value": self.upper_value,
                "satisfied": self.upper_satisfied,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoundReport":
        return cls(
            params=BoundParams(data["n"], data["r"], data["d_E"]),
            d_G_observed=data["d_G"],
            gamma=GammaBreakdown(**data["gamma"]),
            lower_applicable=data["lower"]["applicable"],
            lower_value=data["lower"]["value"],
            upper_applicable=data["upper"]["applicable"],
            upper_value=data["upper"]["value"],
            lower_satisfied=data["lower"]["satisfied"],
            upper_satisfied=data["upper"]["satisfied"],
        )


def bound_report(params: BoundParams, d_G: Optional[int]) -> BoundReport:
    """Evaluate both bounds for one pair; satisfaction is only judged where applicable
    and the pair is reachable."""
    g = gamma(params)
    lo, lo_ok = lower_bound_hops(params)
    hi, hi_ok = upper_bound_hops(params, g.gamma)
    lower_sat = (d_G >= lo) if (lo_ok and d_G is not None) else None
    upper_sat = (d_G <= hi) if (hi_ok and d_G is not None) else None
    return BoundReport(params, d_G, g, lo_ok, lo, hi_ok, hi, lower_sat, upper_sat)
