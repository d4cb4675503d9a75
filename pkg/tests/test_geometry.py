import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rgghops.geometry import (
    Point,
    Rectangle,
    StripInfeasible,
    euclid_dist,
    fit_strip,
    from_strip_frame,
    inner_rectangle_inside,
    rect_connectivity_width,
    strip_frame,
    strip_precondition,
    to_strip_frame,
)


def test_euclid_dist_pythagorean_and_identity():
    assert euclid_dist((0, 0), (3, 4)) == 5.0
    assert euclid_dist((1.5, -2.25), (1.5, -2.25)) == 0.0


def test_euclid_dist_matches_extended_precision():
    rng = np.random.default_rng(11)
    pts = rng.uniform(-500, 500, size=(1000, 4))
    mpmath.mp.dps = 40
    for x1, y1, x2, y2 in pts:
        ours = euclid_dist((x1, y1), (x2, y2))
        ref = mpmath.sqrt((mpmath.mpf(x1) - mpmath.mpf(x2)) ** 2 + (mpmath.mpf(y1) - mpmath.mpf(y2)) ** 2)
        assert abs(ours - float(ref)) <= 1e-12 * float(ref)


@pytest.mark.parametrize("r, alpha, rho", [(1, 0, 1), (10, 5, 7.5), (1, 1, 0)])
def test_rect_connectivity_width_examples(r, alpha, rho):
    assert rect_connectivity_width(r, alpha) == pytest.approx(rho, abs=1e-15)


@pytest.mark.parametrize("r, alpha", [(0, 0), (-1, 0.5), (1, -0.1), (1, 1.5)])
def test_rect_connectivity_width_rejects(r, alpha):
    with pytest.raises(ValueError):
        rect_connectivity_width(r, alpha)


def test_rho_rectangle_diagonal_exact():
    # diagonal^2 = rho^2 + alpha^2 = r^2 - alpha^2 + alpha^4/r^2 <= r^2, checked in rationals
    rng = np.random.default_rng(3)
    for _ in range(500):
        r = Fraction(float(rng.uniform(0.1, 50)))
        alpha = r * Fraction(float(rng.uniform(0, 1)))
        rho = r - alpha * alpha / r
        assert rho * rho + alpha * alpha <= r * r


def test_strip_precondition_examples():
    assert strip_precondition(10, 2, 5, 1)
    assert not strip_precondition(9, 2, 5, 1)
    for alpha in (1e-6, 0.3, 4.0):
        assert strip_precondition(3 * 2.5, 3, 2.5, alpha)


def test_rectangle_and_point():
    rect = Rectangle(0, 2, 0, 1)
    assert rect.contains(Point(2, 1))
    assert not rect.contains((2.1, 0.5))
    assert rect.contains((2.1, 0.5), tol=0.2)
    assert len(rect.corners()) == 4
    with pytest.raises(ValueError):
        Rectangle(1, 0, 0, 1)


def test_fit_strip_horizontal():
    pl = fit_strip((-10, 0), (10, 0), 1.0, 1e4)
    assert pl.beta == 0.0
    assert pl.side == "+"
    assert inner_rectangle_inside(pl, 1e4)


def test_fit_strip_near_top_edge_goes_below():
    pl = fit_strip((-10, 49), (10, 49), 2.0, 1e4)
    assert pl.side == "-"
    corners = pl.inner_corners()
    assert np.all(np.abs(corners) <= 50)
    assert np.all(corners[:, 1] <= 49 + 1e-12)


def test_fit_strip_main_diagonal():
    h = 50.0
    pl = fit_strip((-h, -h), (h, h), 0.5, 1e4)
    assert pl.beta == pytest.approx(math.pi / 4)
    assert inner_rectangle_inside(pl, 1e4)


def test_fit_strip_rejects_short_segment():
    with pytest.raises(ValueError):
        fit_strip((0, 0), (2, 0), 1.0, 100)
    with pytest.raises(ValueError):
        fit_strip((0, 0), (60, 0), 1.0, 100)


def test_fit_strip_always_finds_a_side():
    # Whenever the inner rectangle is non-empty one of the two sides fits.
    rng = np.random.default_rng(0)
    for _ in range(20000):
        u, v = rng.uniform(-5, 5, size=(2, 2))
        t = float(np.hypot(*(v - u)))
        alpha = rng.uniform(0.001, 0.999) * t / 2.02
        pl = fit_strip(u, v, alpha, 100.0)
        assert inner_rectangle_inside(pl, 100.0)


def test_fit_strip_raises_when_no_side_fits(monkeypatch):
    import rgghops.geometry as geo

    monkeypatch.setattr(geo, "inner_rectangle_inside", lambda placement, n, tol=0.0: False)
    with pytest.raises(StripInfeasible):
        geo.fit_strip((-10, 0), (10, 0), 1.0, 1e4)


coord = st.floats(-50, 50, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(coord, coord, coord, coord, st.floats(0.01, 5))
def test_fit_strip_containment_property(x1, y1, x2, y2, alpha):
    n = 1e4
    t = math.hypot(x2 - x1, y2 - y1)
    assume(t > 2 * 1.01 * alpha + 1e-6)
    try:
        pl = fit_strip((x1, y1), (x2, y2), alpha, n)
    except StripInfeasible:
        # Independent corner check: neither side should fit.
        for side in "+-":
            cand = strip_frame((x1, y1), (x2, y2), alpha, side)
            assert not inner_rectangle_inside(cand, n)
        return
    assert np.all(np.abs(pl.inner_corners()) <= 50 + 1e-9)
    fu = to_strip_frame(pl, (x1, y1))
    fv = to_strip_frame(pl, (x2, y2))
    assert np.allclose(fu, [0, 0], atol=1e-9)
    assert np.allclose(fv, [t, 0], atol=1e-9)


def test_fit_strip_succeeds_when_wide_margin():
    # Long segments with small alpha always fit (safe triangles on both sides).
    rng = np.random.default_rng(5)
    for _ in range(500):
        u, v = rng.uniform(-50, 50, size=(2, 2))
        if np.hypot(*(v - u)) < 10:
            continue
        pl = fit_strip(u, v, 0.5, 1e4)
        assert inner_rectangle_inside(pl, 1e4)


def test_frame_round_trip_and_isometry():
    rng = np.random.default_rng(8)
    pl = strip_frame((3.0, -7.0), (-20.0, 11.0), 2.0, "-")
    pts = rng.uniform(-50, 50, size=(1000, 2))
    fp = to_strip_frame(pl, pts)
    assert np.allclose(from_strip_frame(pl, fp), pts, atol=1e-9)
    assert np.allclose(to_strip_frame(pl, pl.u), [0, 0], atol=1e-12)
    d_orig = np.hypot(*(pts[1:] - pts[:-1]).T)
    d_frame = np.hypot(*(fp[1:] - fp[:-1]).T)
    assert np.allclose(d_orig, d_frame, atol=1e-9)


def test_strip_frame_side_orientation():
    plus = strip_frame((0, 0), (10, 0), 1.0, "+")
    minus = strip_frame((0, 0), (10, 0), 1.0, "-")
    assert to_strip_frame(plus, (5, 1))[1] == pytest.approx(1)
    assert to_strip_frame(minus, (5, -1))[1] == pytest.approx(1)
    with pytest.raises(ValueError):
        strip_frame((0, 0), (0, 0), 1.0)
