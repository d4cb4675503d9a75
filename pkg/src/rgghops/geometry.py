"""Planar geometry for the square domain and the rotated strips used by the path constructions.

All lengths are in the units of the square ``[-sqrt(n)/2, sqrt(n)/2]^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

GEOM_TOL = 1e-9
INNER_MARGIN_FACTOR = 1.01


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Rectangle:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"degenerate rectangle bounds: {self}")

    def corners(self) -> list[Point]:
        return [
            Point(self.x_min, self.y_min),
            Point(self.x_max, self.y_min),
            Point(self.x_max, self.y_max),
            Point(self.x_min, self.y_max),
        ]

    def contains(self, p, tol: float = 0.0) -> bool:
        return (
            self.x_min - tol <= p[0] <= self.x_max + tol
            and self.y_min - tol <= p[1] <= self.y_max + tol
        )


class StripInfeasible(ValueError):
    """Neither side of the segment admits the inner strip rectangle inside the square."""


def half_side(n: float) -> float:
    return math.sqrt(n) / 2.0


def domain(n: float) -> Rectangle:
    """The square of area ``n`` centred at the origin."""
    h = half_side(n)
    return Rectangle(-h, h, -h, h)


def in_domain(p, n: float, tol: float = 0.0) -> bool:
    h = half_side(n)
    return abs(p[0]) <= h + tol and abs(p[1]) <= h + tol


def euclid_dist(p, q) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def rect_connectivity_width(r: float, alpha: float) -> float:
    """Length ``rho = r - alpha**2 / r`` of a rectangle of height ``alpha`` with diameter at most ``r``."""
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    if alpha < 0 or alpha > r:
        raise ValueError(f"alpha must lie in [0, r], got alpha={alpha}, r={r}")
    return r - alpha * alpha / r


def strip_precondition(t: float, k: int, r: float, alpha: float) -> bool:
    """True iff ``t >= k*r - 2*alpha**2/(k*r)``.

    When it holds, every u-v path with at most ``k`` edges in a geometric graph of
    radius ``r`` (with u=(0,0), v=(t,0)) keeps all its vertices within ``|y| <= alpha``.
    """
    kr = k * r
    return t >= kr - 2.0 * alpha * alpha / kr


# D4 symmetries of the square as 2x2 integer matrices. Each is its own
# inverse or has its inverse listed, so we only ever need M and M.T.
def _d4_matrices():
    mats = []
    for swap in (False, True):
        for sx in (1, -1):
            for sy in (1, -1):
                m = np.array([[sx, 0], [0, sy]], dtype=float)
                if swap:
                    m = m[::-1]
                mats.append(m)
    return mats


_D4 = _d4_matrices()


@dataclass(frozen=True)
class StripPlacement:
    """A rigid placement of the strip frame in which ``u=(0,0)`` and ``v=(t,0)``.

    ``side`` is ``"+"`` when the strip ``[0,t] x [0,alpha]`` lies to the left of the
    vector from u to v and ``"-"`` when it lies to the right. ``beta`` is the angle of
    the segment after reduction to ``[0, pi/4]`` by the symmetries of the square;
    ``direction`` is the unreduced angle of ``v - u``.
    """

    u: Point
    v: Point
    t: float
    alpha: float
    side: str
    beta: float
    direction: float
    inner_margin: float

    @property
    def origin(self) -> Point:
        return self.u

    @property
    def axis(self) -> np.ndarray:
        return np.array([math.cos(self.direction), math.sin(self.direction)])

    @property
    def normal(self) -> np.ndarray:
        c, s = math.cos(self.direction), math.sin(self.direction)
        sign = 1.0 if self.side == "+" else -1.0
        return sign * np.array([-s, c])

    def inner_rectangle(self) -> Rectangle:
        m = self.inner_margin
        return Rectangle(m, self.t - m, 0.0, self.alpha)

    def inner_corners(self) -> np.ndarray:
        """Corners of the inner rectangle mapped back into the square."""
        return from_strip_frame(self, np.array(self.inner_rectangle().corners()))


def _placement(u, v, alpha, side, beta=None, margin=None) -> StripPlacement:
    u = Point(float(u[0]), float(u[1]))
    v = Point(float(v[0]), float(v[1]))
    t = euclid_dist(u, v)
    direction = math.atan2(v.y - u.y, v.x - u.x)
    if beta is None:
        beta = _reduced_angle(u, v)
    if margin is None:
        margin = INNER_MARGIN_FACTOR * alpha
    return StripPlacement(u, v, t, float(alpha), side, beta, direction, margin)


def _reduced_angle(u, v) -> float:
    dx, dy = abs(v[0] - u[0]), abs(v[1] - u[1])
    return math.atan2(min(dx, dy), max(dx, dy))


def strip_frame(u, v, alpha: float, side: str = "+") -> StripPlacement:
    """Placement for the pair without any containment requirement.

    Used where only the rigid frame matters, e.g. the two-sided strip of the
    lower-bound chain.
    """
    if side not in ("+", "-"):
        raise ValueError(f"side must be '+' or '-', got {side!r}")
    if euclid_dist(u, v) == 0:
        raise ValueError("u and v coincide")
    return _placement(u, v, alpha, side)


def to_strip_frame(placement: StripPlacement, p) -> np.ndarray:
    """Map points of the square into strip coordinates. Accepts one point or an (m, 2) array."""
    p = np.asarray(p, dtype=float)
    d = p - np.asarray(placement.u)
    return np.stack([d @ placement.axis, d @ placement.normal], axis=-1)


def from_strip_frame(placement: StripPlacement, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    s = p[..., 0:1]
    w = p[..., 1:2]
    out = np.asarray(placement.u) + s * placement.axis + w * placement.normal
    return out if p.ndim > 1 else out.reshape(2)


def inner_rectangle_inside(placement: StripPlacement, n: float, tol: float = GEOM_TOL) -> bool:
    """Four-corner containment check of the mapped inner rectangle (convexity makes it exact)."""
    h = half_side(n)
    corners = placement.inner_corners()
    return bool(np.all(np.abs(corners) <= h + tol))


def _side_ok_reduced(u, v, alpha, h, side, margin) -> bool:
    """Safe-triangle test in the reduced frame (x_u < x_v, y_u <= y_v, beta <= pi/4).

    Each side's rectangle sticks out of the bounding box of the segment in two
    right-angled corner triangles. A triangle is harmless if its side parallel to
    the segment is at most ``margin`` (then the inner rectangle skips it) or if it
    lies inside the square.
    """
    dx, dy = v[0] - u[0], v[1] - u[1]
    t = math.hypot(dx, dy)
    c, s = dx / t, dy / t
    nx, ny = (-s, c) if side == "+" else (s, -c)
    if side == "+":
        # T_u^+ pokes out past x = x_u, T_v^+ past y = y_v.
        len_u = alpha * s / c
        len_v = alpha * c / s if s > 0 else math.inf
        corner_u = (u[0] + alpha * nx, u[1] + alpha * ny)
        corner_v = (v[0] + alpha * nx, v[1] + alpha * ny)
        contained_u = corner_u[0] >= -h
        contained_v = corner_v[1] <= h
    else:
        # T_u^- pokes out below y = y_u, T_v^- past x = x_v.
        len_u = alpha * c / s if s > 0 else math.inf
        len_v = alpha * s / c
        corner_u = (u[0] + alpha * nx, u[1] + alpha * ny)
        corner_v = (v[0] + alpha * nx, v[1] + alpha * ny)
        contained_u = corner_u[1] >= -h
        contained_v = corner_v[0] <= h
    safe_u = len_u <= margin or contained_u
    safe_v = len_v <= margin or contained_v
    return safe_u and safe_v


def fit_strip(u, v, alpha: float, n: float) -> StripPlacement:
    """Place the one-sided strip of width ``alpha`` along ``uv`` so that its inner
    rectangle ``[1.01 alpha, t - 1.01 alpha] x [0, alpha]`` lies inside the square.

    The pair is first reduced by the symmetries of the square to ``x_u < x_v``,
    ``y_u <= y_v`` and an angle in ``[0, pi/4]``; the left side is tried before the
    right one. Raises :class:`StripInfeasible` if neither side fits.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    h = half_side(n)
    if not (in_domain(u, n, GEOM_TOL) and in_domain(v, n, GEOM_TOL)):
        raise ValueError("u and v must lie in the square")
    t = euclid_dist(u, v)
    margin = INNER_MARGIN_FACTOR * alpha
    if not 2 * margin < t:
        raise ValueError(f"segment too short for the inner rectangle: t={t}, alpha={alpha}")

    # Find a symmetry mapping the pair into the reduced configuration; swapping
    # u and v leaves the inner rectangle unchanged.
    ru = rv = mat = None
    for m in _D4:
        for a, b in ((u, v), (v, u)):
            ma, mb = m @ a, m @ b
            d = mb - ma
            if d[0] > 0 and d[1] >= 0 and d[1] <= d[0]:
                ru, rv, mat = ma, mb, m
                break
        if mat is not None:
            break
    beta = math.atan2(rv[1] - ru[1], rv[0] - ru[0])

    candidates = []
    for side in ("+", "-"):
        if _side_ok_reduced(ru, rv, alpha, h, side, margin):
            candidates.append(side)
    for side in ("+", "-"):
        if side not in candidates:
            candidates.append(side)

    for side in candidates:
        # Centre of the inner rectangle in the reduced frame, mapped back, tells
        # us which side of the original segment it is on.
        red = _placement(ru, rv, alpha, side, beta, margin)
        centre = from_strip_frame(red, np.array([t / 2.0, alpha / 2.0]))
        centre = mat.T @ centre
        cross = (v[0] - u[0]) * (centre[1] - u[1]) - (v[1] - u[1]) * (centre[0] - u[0])
        orig_side = "+" if cross > 0 else "-"
        placement = _placement(u, v, alpha, orig_side, beta, margin)
        if inner_rectangle_inside(placement, n):
            return placement
    raise StripInfeasible(
        f"no side of the segment admits the inner rectangle (t={t:.6g}, alpha={alpha:.6g}, n={n})"
    )
