"""Chernoff-type tail bounds for sums of i.i.d. exponentials, and their Monte Carlo checks.

Bounds are evaluated in log space. Anything below ``exp(-700)`` is reported
through ``LogProb.log_value`` with ``underflow=True`` instead of as a bare 0.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .sampler import as_seed, sample_exponentials
from .strip_path import PROOF_CONSTANTS, ProofConstants

UNDERFLOW_LOG = -700.0
UPPER = "upper"
LOWER = "lower"


@dataclass(frozen=True)
class LogProb:
    log_value: float

    @property
    def underflow(self) -> bool:
        return self.log_value < UNDERFLOW_LOG

    @property
    def value(self) -> float:
        return 0.0 if self.underflow else math.exp(self.log_value)

    def __float__(self):
        return self.value


def _clamped(log_value: float) -> LogProb:
    # A probability bound above 1 says nothing; clamp only here at the end.
    return LogProb(min(log_value, 0.0))


def _logaddexp(a: float, b: float) -> float:
    return float(np.logaddexp(a, b))


def upper_tail_log(N: int, delta: float) -> float:
    if N < 1 or not delta > 0:
        raise ValueError(f"need N >= 1 and delta > 0, got N={N}, delta={delta}")
    return N * (math.log1p(delta) - delta)


def lower_tail_log(N: int, delta: float) -> float:
    if N < 1 or not 0 < delta < 1:
        raise ValueError(f"need N >= 1 and 0 < delta < 1, got N={N}, delta={delta}")
    return N * (math.log1p(-delta) + delta)


def upper_tail_bound(N: int, delta: float) -> float:
    """``((1 + delta) / e^delta)^N`` bounds ``Pr(X >= (1 + delta) E X)``."""
    return math.exp(upper_tail_log(N, delta))


def lower_tail_bound(N: int, delta: float) -> float:
    """``((1 - delta) e^delta)^N`` bounds ``Pr(X <= (1 - delta) E X)``."""
    return math.exp(lower_tail_log(N, delta))


def g_function(x):
    """``x - log(1 + x)``; accepts scalars or arrays."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= -1):
        raise ValueError("g is defined for x > -1 only")
    out = x_arr - np.log1p(x_arr)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TailQuery:
    N: int
    delta: float
    rate: float = 1.0
    side: str = UPPER

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        if not self.delta > 0 or not self.rate > 0:
            raise ValueError("delta and rate must be positive")
        if self.side not in (UPPER, LOWER):
            raise ValueError(f"side must be {UPPER!r} or {LOWER!r}")
        if self.side == LOWER and not self.delta < 1:
            raise ValueError("lower tail needs delta < 1")

    def analytic_bound(self) -> float:
        if self.side == UPPER:
            return upper_tail_bound(self.N, self.delta)
        return lower_tail_bound(self.N, self.delta)


@dataclass(frozen=True)
class TailCheckResult:
    query: TailQuery
    analytic_bound: float
    empirical: float
    trials: int
    ci_radius: float

    @property
    def passed(self) -> bool:
        return self.empirical <= self.analytic_bound + self.ci_radius

    def to_dict(self) -> dict:
        row = asdict(self.query)
        row.update(
            analytic_bound=self.analytic_bound,
            empirical=self.empirical,
            trials=self.trials,
            ci_radius=self.ci_radius,
            passed=self.passed,
        )
        return row


def monte_carlo_tail(query: TailQuery, trials: int, seed, chunk: int = 1 << 22) -> TailCheckResult:
    """Frequency of the tail event over ``trials`` sums of ``N`` exponential draws.

    ``ci_radius`` is three binomial standard errors of the empirical frequency.
    """
    if trials < 1000:
        raise ValueError("monte_carlo_tail needs at least 1000 trials")
    rng = as_seed(seed).rng(tag=7)
    mean = query.N / query.rate
    hits = 0
    per = max(1, chunk // query.N)
    done = 0
    while done < trials:
        m = min(per, trials - done)
        sums = sample_exponentials(query.rate, m * query.N, rng).reshape(m, query.N).sum(axis=1)
        if query.side == UPPER:
            hits += int(np.count_nonzero(sums >= (1 + query.delta) * mean))
        else:
            hits += int(np.count_nonzero(sums <= (1 - query.delta) * mean))
        done += m
    p = hits / trials
    ci = 3.0 * math.sqrt(p * (1 - p) / trials)
    return TailCheckResult(query, query.analytic_bound(), p, trials, ci)


def failure_probability_upper(
    t: float,
    r: float,
    n: float,
    delta: float,
    consts: ProofConstants = PROOF_CONSTANTS,
    *,
    enforce_range: bool = True,
) -> LogProb:
    """Failure bound of the greedy construction:
    ``n exp(-(F+1) delta^{1/2} r^{4/3} / (2 J^{3/2})) + exp(-g((delta/J)^{3/2}) t/r)``.
    """
    lo, hi = consts.delta_range(r)
    if enforce_range and not lo <= delta <= hi:
        raise ValueError(f"delta={delta:.6g} outside [{lo:.6g}, {hi:.6g}]")
    if not delta > 0:
        raise ValueError("delta must be positive")
    first = math.log(n) - (consts.F + 1) * math.sqrt(delta) * r ** (4 / 3) / (2 * consts.J ** 1.5)
    second = -g_function((delta / consts.J) ** 1.5) * t / r
    return _clamped(_logaddexp(first, second))


def failure_probability_lower(t: float, r: float, delta: float) -> LogProb:
    """Bound on ``Pr(d_G <= (t/r)(1 + delta/(t r)^{2/3}))``:
    ``(t/r) exp(-sqrt(delta/2) (t r)^{2/3}) + exp(-(1 - sqrt(2 delta^3))^2 t/(2r))``.
    """
    if not 0 < delta < 2 ** (-1 / 3):
        raise ValueError(f"delta must lie in (0, 2^(-1/3)), got {delta}")
    first = math.log(t / r) - math.sqrt(delta / 2) * (t * r) ** (2 / 3)
    second = -((1 - math.sqrt(2 * delta ** 3)) ** 2) * t / (2 * r)
    return _clamped(_logaddexp(first, second))
