"""Constructive chains along a strip between two vertices.

``greedy_strip_path`` builds a short u-v path inside a one-sided strip of width
``alpha`` by repeatedly jumping to the rightmost vertex of the next rectangle.
``lower_chain_certificate`` runs the same rightmost-vertex chain with step ``r``
in a two-sided strip; if the chain falls short of ``v`` after ``k`` steps, no
u-v path with at most ``k`` edges exists.

Both work in the strip frame where ``u = (0, 0)`` and ``v = (t, 0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bounds import BoundParams, gamma
from .geometry import (
    GEOM_TOL,
    StripPlacement,
    rect_connectivity_width,
    strip_frame,
    strip_precondition,
    to_strip_frame,
)
from .sampler import SeedSpec, sample_poissonized
from .spatial_graph import GeoGraph

SYNTHETIC = -1

SUCCESS = "success"
FAILED_SYNTHETIC = "failed-synthetic"
FAILED_SHORT = "failed-short"


@dataclass(frozen=True)
class ProofConstants:
    """Constants of the upper-bound construction.

    ``J = 10**(4/3)`` makes ``C = 1/J**1.5 = 10**-2`` and ``3**(2/3) * J = 300**(2/3)``.
    """

    B: float = 47 / 50
    C: float = 1e-2
    F: float = 23 / 200
    D: float = 70.0
    E: float = 31.0
    J: float = 10 ** (4 / 3)

    def check(self) -> dict:
        """Evaluate the three side conditions the construction relies on."""
        return {
            "B^2 + C/B <= 1/(F+1)": self.B ** 2 + self.C / self.B <= 1 / (self.F + 1),
            "J > 3(F+1)/2^(2/3)": self.J > 3 * (self.F + 1) / 2 ** (2 / 3),
            "C = 1/J^(3/2)": math.isclose(self.C, 1 / self.J ** 1.5, rel_tol=1e-12),
        }

    def delta_range(self, r: float) -> tuple[float, float]:
        return self.J, self.F * r ** (4 / 3)


PROOF_CONSTANTS = ProofConstants()


def _check_delta(delta: float, r: float, consts: ProofConstants):
    lo, hi = consts.delta_range(r)
    if not lo <= delta <= hi:
        raise ValueError(f"delta={delta:.6g} outside [{lo:.6g}, {hi:.6g}] for r={r:.6g}")


def choose_alpha(delta: float, r: float, consts: ProofConstants = PROOF_CONSTANTS) -> float:
    """Strip width ``B * delta**0.5 * r**(1/3)`` for ``J <= delta <= F r^(4/3)``."""
    _check_delta(delta, r, consts)
    return consts.B * math.sqrt(delta) * r ** (1 / 3)


def default_delta(n: float, r: float, t: float, consts: ProofConstants = PROOF_CONSTANTS) -> float:
    """``max(J, gamma(n, r, t))``: with this delta the hop budget equals the closed-form upper bound."""
    return max(consts.J, gamma(BoundParams(n, r, t)).gamma)


def hop_budget(t: float, r: float, delta: float) -> int:
    return int(math.ceil((t / r) * (1 + delta * r ** (-4 / 3))))


@dataclass
class ChainRecord:
    """Rightmost-vertex chain: entry ``i`` holds ``(vertex or SYNTHETIC, x_i, a_i)``,
    with ``x_i = x_{i-1} + rho - a_i``."""

    k: int
    alpha: float
    rho: float
    vertices: list = field(default_factory=list)
    x: list = field(default_factory=list)
    a: list = field(default_factory=list)
    lows: list = field(default_factory=list)

    def append(self, vertex: int, x: float, a: float, low: float):
        self.vertices.append(int(vertex))
        self.x.append(float(x))
        self.a.append(float(a))
        self.lows.append(float(low))

    def __len__(self):
        return len(self.x)

    @property
    def has_synthetic(self) -> bool:
        return SYNTHETIC in self.vertices

    @property
    def last_x(self) -> float:
        return self.x[-1] if self.x else 0.0

    def rectangles(self) -> list[tuple[float, float]]:
        """x-intervals ``(low, high]`` of the rectangles scanned, in order."""
        highs = [(self.x[i - 1] if i else 0.0) + self.rho for i in range(len(self.x))]
        return list(zip(self.lows, highs))

    def telescoped_x(self) -> float:
        return len(self.x) * self.rho - math.fsum(self.a)

    def to_list(self) -> list[dict]:
        return [
            {"vertex": "SYNTHETIC" if v == SYNTHETIC else v, "x": x, "a": a}
            for v, x, a in zip(self.vertices, self.x, self.a)
        ]


class _StripIndex:
    """Vertices of the strip sorted by strip x; rightmost lookups by binary search.

    Ties in x go to the smallest vertex index.
    """

    def __init__(self, frame_pts: np.ndarray, ids: np.ndarray):
        order = np.lexsort((-ids, frame_pts[:, 0]))
        self.s = frame_pts[order, 0]
        self.ids = ids[order]

    def rightmost(self, low: float, high: float) -> Optional[int]:
        """Position of the rightmost vertex with ``low < s <= high``."""
        j = int(np.searchsorted(self.s, high, side="right")) - 1
        if j < 0 or not self.s[j] > low:
            return None
        return j


def _run_chain(index: _StripIndex, rho: float, steps: int, alpha: float, stop_at: Optional[float]):
    """Shared chain recursion. Stops early once ``x_j + rho >= stop_at``."""
    chain = ChainRecord(steps, alpha, rho)
    x_prev, a_prev = 0.0, 0.0
    for _ in range(steps):
        if stop_at is not None and x_prev + rho >= stop_at:
            break
        low = x_prev + a_prev
        j = index.rightmost(low, x_prev + rho)
        if j is None:
            x_i = low
            a_i = rho - a_prev
            chain.append(SYNTHETIC, x_i, a_i, low)
        else:
            x_i = float(index.s[j])
            a_i = x_prev + rho - x_i
            chain.append(int(index.ids[j]), x_i, a_i, low)
        x_prev, a_prev = x_i, a_i
    return chain


@dataclass
class StripPathResult:
    status: str
    path: list
    hops: Optional[int]
    budget_k: int
    chain: ChainRecord
    delta_used: float
    alpha_used: float

    @property
    def success(self) -> bool:
        return self.status == SUCCESS

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "hops": self.hops,
            "budget_k": self.budget_k,
            "delta": self.delta_used,
            "alpha": self.alpha_used,
            "rho": self.chain.rho,
            "chain": self.chain.to_list(),
            "path": list(self.path),
        }


def _pair_indices(g: GeoGraph, placement: StripPlacement, u: Optional[int], v: Optional[int]):
    """Resolve the vertex indices of the placement's endpoints."""
    out = []
    for idx, p in ((u, placement.u), (v, placement.v)):
        if idx is None:
            hits = np.flatnonzero((g.points[:, 0] == p[0]) & (g.points[:, 1] == p[1]))
            if hits.size == 0:
                raise ValueError(f"placement endpoint {tuple(p)} is not a vertex of the graph")
            idx = int(hits[0])
        elif not np.array_equal(g.points[idx], np.asarray(p)):
            raise ValueError(f"vertex {idx} does not sit at placement endpoint {tuple(p)}")
        out.append(int(idx))
    return out


def greedy_strip_path(
    g: GeoGraph,
    placement: StripPlacement,
    delta: Optional[float] = None,
    consts: ProofConstants = PROOF_CONSTANTS,
    *,
    u: Optional[int] = None,
    v: Optional[int] = None,
    enforce_range: bool = True,
) -> StripPathResult:
    """Greedy path from u to v inside the strip ``[0, t] x [0, alpha]`` of ``placement``.

    With hop budget ``k = ceil((t/r)(1 + delta r^{-4/3}))``, step ``i = 1..k-1`` picks
    the rightmost vertex in ``(x_{i-1} + a_{i-1}, x_{i-1} + rho] x [0, alpha]`` where
    ``rho = r - alpha**2/r``; the run succeeds as soon as ``x_j + rho >= t`` and then
    closes the path with v. An empty rectangle records a synthetic entry, which
    rules out success for the whole run.

    ``delta`` defaults to ``max(J, gamma)``. ``enforce_range=False`` lifts the
    ``J <= delta <= F r^{4/3}`` restriction, which is empty at small ``r``; the
    construction itself only needs ``alpha < r``.
    """
    r = g.r
    t = placement.t
    alpha = placement.alpha
    if delta is None:
        delta = default_delta(g.instance.n, r, t, consts)
    if enforce_range:
        _check_delta(delta, r, consts)
    elif not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if not 0 < alpha < r:
        raise ValueError(f"placement alpha={alpha} must lie in (0, r={r})")
    iu, iv = _pair_indices(g, placement, u, v)
    k = hop_budget(t, r, delta)
    rho = rect_connectivity_width(r, alpha)

    if t <= r:
        chain = ChainRecord(k, alpha, rho)
        path = [iu] if iu == iv else [iu, iv]
        return StripPathResult(SUCCESS, path, len(path) - 1, k, chain, delta, alpha)

    fp = to_strip_frame(placement, g.points)
    inside = (fp[:, 1] >= 0) & (fp[:, 1] <= alpha) & (fp[:, 0] >= 0) & (fp[:, 0] <= t)
    ids = np.flatnonzero(inside)
    index = _StripIndex(fp[ids], ids)
    chain = _run_chain(index, rho, k - 1, alpha, stop_at=t)

    reached = chain.last_x + rho >= t
    if chain.has_synthetic:
        status = FAILED_SYNTHETIC
    elif not reached:
        status = FAILED_SHORT
    else:
        status = SUCCESS
    if status != SUCCESS:
        return StripPathResult(status, [], None, k, chain, delta, alpha)

    path = [iu]
    for vert in chain.vertices:
        if vert == iv:
            break
        path.append(vert)
    path.append(iv)
    d = np.diff(g.points[path], axis=0)
    if np.any(d[:, 0] ** 2 + d[:, 1] ** 2 > g.r2):
        raise RuntimeError("greedy chain produced a hop longer than r")
    return StripPathResult(SUCCESS, path, len(path) - 1, k, chain, delta, alpha)


def lower_alpha(t: float, r: float, k: int, delta: float = 0.5) -> float:
    """Default half-width ``sqrt(delta/2) * (k^3 r^2 / t)^{1/3}`` for the lower chain."""
    return math.sqrt(delta / 2) * (k ** 3 * r * r / t) ** (1 / 3)


@dataclass
class LowerCertificate:
    chain: ChainRecord
    certified: bool
    precondition: bool

    @property
    def proves_distance_exceeds_k(self) -> bool:
        return self.certified and self.precondition


def lower_chain_certificate(
    g: GeoGraph,
    placement: StripPlacement,
    k: int,
    *,
    tol: float = GEOM_TOL,
) -> LowerCertificate:
    """Rightmost-vertex chain with step ``r`` in the two-sided strip ``[0,t] x [-alpha, alpha]``.

    ``certified`` is ``x_k < t``. Together with ``t >= k r - 2 alpha^2/(k r)`` it proves
    ``d_G(u, v) > k``: every path of at most ``k`` edges stays in the strip, and its
    i-th vertex can be no further right than ``x_i``. The strip is widened by ``tol``
    and certification asks for a gap of ``tol * max(1, t)``; both only make the
    answer more conservative.
    """
    if k < 1 or int(k) != k:
        raise ValueError(f"k must be a positive integer, got {k}")
    r = g.r
    t = placement.t
    alpha = placement.alpha
    if not alpha > 0 or not t > 0:
        raise ValueError("placement needs positive alpha and t")
    fp = to_strip_frame(placement, g.points)
    inside = np.abs(fp[:, 1]) <= alpha + tol
    ids = np.flatnonzero(inside)
    chain = _run_chain(_StripIndex(fp[ids], ids), r, int(k), alpha, stop_at=None)
    # Frame coordinates carry rounding error (v itself may land an ulp short of t),
    # so only a clear gap certifies.
    certified = chain.last_x < t - tol * max(1.0, t)
    return LowerCertificate(chain, bool(certified), strip_precondition(t, int(k), r, alpha))


@dataclass(frozen=True)
class ShortfallLaw:
    beta: np.ndarray
    empirical: np.ndarray
    ci_radius: np.ndarray
    theoretical: np.ndarray
    trials: int
    alpha: float
    r: float

    def within(self) -> np.ndarray:
        """Per grid point: empirical frequency within ``ci_radius`` of the closed form."""
        return np.abs(self.empirical - self.theoretical) <= self.ci_radius


def first_shortfall(points: np.ndarray, alpha: float, r: float) -> float:
    """``a_1 = r - x_1`` for the chain started at the origin along the x axis."""
    inside = (np.abs(points[:, 1]) <= alpha) & (points[:, 0] > 0) & (points[:, 0] <= r)
    if not inside.any():
        return r
    return r - float(points[inside, 0].max())


def empirical_shortfall_law(
    n: float,
    alpha: float,
    r: float,
    trials: int,
    master_seed: int = 0,
    beta: Optional[np.ndarray] = None,
) -> ShortfallLaw:
    """Empirical survival ``Pr(a_1 >= beta)`` over Poissonized instances with ``u`` at the
    centre, against ``exp(-2 alpha beta)`` (zero beyond ``r``).

    ``ci_radius`` is three binomial standard errors, using the theoretical value so
    that grid points with an empirical frequency of exactly 0 or 1 keep a band.
    """
    h = math.sqrt(n) / 2
    if not (r <= h and alpha <= h):
        raise ValueError("first rectangle must fit inside the square")
    if beta is None:
        beta = np.linspace(0.0, r, 11)
    beta = np.asarray(beta, dtype=float)
    shortfalls = np.empty(trials)
    for i in range(trials):
        inst = sample_poissonized(n, r, SeedSpec(master_seed, i), u=(0.0, 0.0))
        bg = inst.points[: inst.poisson_count]
        shortfalls[i] = first_shortfall(bg, alpha, r)
    emp = (shortfalls[None, :] >= beta[:, None]).mean(axis=1)
    theo = np.where(beta <= r, np.exp(-2 * alpha * np.clip(beta, 0, None)), 0.0)
    p = np.where((theo > 0) & (theo < 1), theo, emp)
    ci = 3 * np.sqrt(p * (1 - p) / trials)
    return ShortfallLaw(beta, emp, ci, theo, trials, alpha, r)


__all__ = [
    "SYNTHETIC",
    "SUCCESS",
    "FAILED_SYNTHETIC",
    "FAILED_SHORT",
    "ProofConstants",
    "PROOF_CONSTANTS",
    "ChainRecord",
    "StripPathResult",
    "LowerCertificate",
    "ShortfallLaw",
    "choose_alpha",
    "default_delta",
    "hop_budget",
    "greedy_strip_path",
    "lower_alpha",
    "lower_chain_certificate",
    "empirical_shortfall_law",
    "first_shortfall",
    "strip_frame",
]
