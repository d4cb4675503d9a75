"""Seeded vertex-set generation for the uniform and Poissonized models."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import half_side, in_domain

UNIFORM = "uniform-n"
POISSONIZED = "poissonized-uv"

_MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit integers."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus trial index.

    The per-trial substream seed is ``mix64(mix64(master_seed) ^ trial_index)``;
    ``rng(tag)`` derives further independent streams for the same trial
    (``tag=0`` is the one used for point sampling).
    """

    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        if self.trial_index < 0:
            raise ValueError("trial_index must be nonnegative")

    @property
    def substream_seed(self) -> int:
        return mix64(mix64(self.master_seed & _MASK64) ^ (self.trial_index & _MASK64))

    def stream_seed(self, tag: int = 0) -> int:
        if tag == 0:
            return self.substream_seed
        return mix64(self.substream_seed ^ mix64(tag & _MASK64))

    def rng(self, tag: int = 0) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.stream_seed(tag)))

    def to_dict(self) -> dict:
        return {"master_seed": self.master_seed, "trial_index": self.trial_index}


def as_seed(seed) -> SeedSpec:
    if isinstance(seed, SeedSpec):
        return seed
    return SeedSpec(int(seed), 0)


@dataclass(frozen=True, eq=False)
class RggInstance:
    """A realized point set in the square of area ``n``.

    ``points`` is an ``(m, 2)`` float array; vertex identity is the row index.
    For the Poissonized model the labelled vertices are the last two rows and
    ``poisson_count`` holds the Poisson draw.
    """

    n: float
    r: float
    model: str
    points: np.ndarray
    seed: Optional[SeedSpec] = None
    labelled_u: Optional[int] = None
    labelled_v: Optional[int] = None
    poisson_count: Optional[int] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must have shape (m, 2), got {pts.shape}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.model not in (UNIFORM, POISSONIZED):
            raise ValueError(f"unknown model {self.model!r}")
        h = half_side(self.n)
        if pts.size and np.abs(pts).max() > h:
            raise ValueError("points outside the square")
        if self.model == POISSONIZED:
            m = len(pts)
            for idx in (self.labelled_u, self.labelled_v):
                if idx is None or not 0 <= idx < m:
                    raise ValueError("Poissonized instances need valid labelled_u / labelled_v")

    @property
    def realized_count(self) -> int:
        return len(self.points)

    @property
    def half_side(self) -> float:
        return half_side(self.n)

    @property
    def side(self) -> float:
        return math.sqrt(self.n)

    def with_radius(self, r: float) -> "RggInstance":
        return RggInstance(
            self.n, r, self.model, self.points, self.seed,
            self.labelled_u, self.labelled_v, self.poisson_count,
        )

    def metadata(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "model": self.model,
            "seed": self.seed.to_dict() if self.seed is not None else None,
            "realized_count": self.realized_count,
            "labelled_u": self.labelled_u,
            "labelled_v": self.labelled_v,
            "poisson_count": self.poisson_count,
        }


def _uniform_points(rng: np.random.Generator, count: int, n: float) -> np.ndarray:
    side = math.sqrt(n)
    # (U - 0.5) * side with U in [0, 1) stays inside [-side/2, side/2] after rounding.
    return (rng.random((count, 2)) - 0.5) * side


def sample_uniform(n: int, r: float, seed) -> RggInstance:
    """Exactly ``n`` i.i.d. uniform points in the square of area ``n``."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")
    seed = as_seed(seed)
    pts = _uniform_points(seed.rng(), int(n), n)
    return RggInstance(n=int(n), r=float(r), model=UNIFORM, points=pts, seed=seed)


def sample_poissonized(n, r: float, seed, u=None, v=None) -> RggInstance:
    """Poisson(n) background points plus labelled ``u`` and ``v`` appended last.

    Count-then-place: draw ``N ~ Poisson(n)``, then ``N`` uniform points. Missing
    ``u``/``v`` are drawn uniformly after the background points.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    for name, p in (("u", u), ("v", v)):
        if p is not None and not in_domain(p, n):
            raise ValueError(f"{name}={tuple(p)} lies outside the square")
    seed = as_seed(seed)
    rng = seed.rng()
    count = int(rng.poisson(n))
    background = _uniform_points(rng, count, n)
    extra = _uniform_points(rng, 2, n)
    uu = extra[0] if u is None else np.asarray(u, dtype=float)
    vv = extra[1] if v is None else np.asarray(v, dtype=float)
    pts = np.vstack([background, uu, vv])
    return RggInstance(
        n=n, r=float(r), model=POISSONIZED, points=pts, seed=seed,
        labelled_u=count, labelled_v=count + 1, poisson_count=count,
    )


def sample_exponentials(rate: float, count: int, seed) -> np.ndarray:
    """I.i.d. exponential draws with the given rate (mean ``1/rate``)."""
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    rng = seed if isinstance(seed, np.random.Generator) else as_seed(seed).rng()
    x = rng.exponential(1.0 / rate, size=int(count))
    # numpy can return exactly 0.0 with probability ~2**-53; keep the support open.
    zero = x == 0.0
    if zero.any():
        x[zero] = np.nextafter(0.0, 1.0)
    return x
