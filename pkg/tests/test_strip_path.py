import math

import numpy as np
import pytest

from rgghops.bounds import connectivity_threshold
from rgghops.geometry import fit_strip, strip_frame, strip_precondition
from rgghops.sampler import UNIFORM, RggInstance, SeedSpec, sample_uniform
from rgghops.spatial_graph import bfs_distance, build_graph
from rgghops.strip_path import (
    FAILED_SYNTHETIC,
    PROOF_CONSTANTS,
    SUCCESS,
    SYNTHETIC,
    ProofConstants,
    choose_alpha,
    default_delta,
    empirical_shortfall_law,
    greedy_strip_path,
    hop_budget,
    lower_alpha,
    lower_chain_certificate,
)


def graph_of(points, r, n=400.0):
    return build_graph(RggInstance(n=n, r=r, model=UNIFORM, points=np.asarray(points, dtype=float)))


def test_proof_constants_consistent():
    c = PROOF_CONSTANTS
    assert all(c.check().values())
    assert c.C == pytest.approx(1 / c.J ** 1.5)
    assert 3 ** (2 / 3) * c.J == pytest.approx(300 ** (2 / 3))
    # the negative exponent would break every side condition
    bad = ProofConstants(J=10 ** (-4 / 3))
    assert not bad.check()["J > 3(F+1)/2^(2/3)"]


def test_choose_alpha_examples():
    assert choose_alpha(44.814, 260.17) == pytest.approx(40.17, abs=0.01)
    c = PROOF_CONSTANTS
    r = 260.17
    top = c.F * r ** (4 / 3)
    assert choose_alpha(top, r) == pytest.approx(c.B * math.sqrt(c.F) * r, rel=1e-12)
    assert choose_alpha(top, r) < r
    for delta in np.linspace(c.J, top, 7):
        assert choose_alpha(delta, r) / r ** (1 / 3) == pytest.approx(c.B * math.sqrt(delta))
    with pytest.raises(ValueError):
        choose_alpha(c.J / 2, r)
    with pytest.raises(ValueError):
        choose_alpha(top * 1.01, r)


def test_hop_budget_and_default_delta():
    assert hop_budget(1414.21, 260.17, 81.89) == 6
    assert default_delta(1e4, 8.56, 50.0) >= PROOF_CONSTANTS.J


def test_empty_strip_fails_synthetic():
    # u, v and one vertex well outside the strip
    g = graph_of([[0.0, 0.0], [10.0, 0.0], [5.0, -6.0]], 2.0)
    pl = strip_frame(g.points[0], g.points[1], 1.0, "+")
    res = greedy_strip_path(g, pl, delta=30.0, u=0, v=1, enforce_range=False)
    assert res.status == FAILED_SYNTHETIC
    assert res.path == [] and res.hops is None
    assert res.chain.has_synthetic
    assert all(v == SYNTHETIC for v in res.chain.vertices)


def test_short_pair_is_one_hop():
    g = graph_of([[0.0, 0.0], [1.5, 0.5]], 2.0)
    pl = strip_frame(g.points[0], g.points[1], 0.5, "+")
    res = greedy_strip_path(g, pl, delta=30.0, enforce_range=False)
    assert res.success and res.path == [0, 1] and res.hops == 1


def test_delta_range_is_enforced_by_default():
    g = graph_of([[0.0, 0.0], [10.0, 0.0]], 2.0)
    pl = strip_frame(g.points[0], g.points[1], 1.0, "+")
    with pytest.raises(ValueError):
        greedy_strip_path(g, pl, delta=30.0)


def test_greedy_on_a_hand_built_strip():
    # Vertices every 1.5 along the axis inside the strip: each rectangle holds one.
    xs = np.arange(-6, 6.01, 1.5)
    pts = np.column_stack([xs, np.full_like(xs, 0.2)])
    pts[0, 1] = 0.0
    pts[-1, 1] = 0.0
    g = graph_of(pts, 2.0)
    pl = strip_frame(pts[0], pts[-1], 0.5, "+")
    res = greedy_strip_path(g, pl, delta=30.0, enforce_range=False)
    assert res.success
    assert res.path[0] == 0 and res.path[-1] == len(pts) - 1
    assert bfs_distance(g, 0, len(pts) - 1).hops <= res.hops <= res.budget_k


def test_chain_invariants_and_dense_consistency():
    n = 10_000
    r = 5 * connectivity_threshold(n)
    inst = sample_uniform(n, r, SeedSpec(5))
    g = build_graph(inst)
    rng = np.random.default_rng(1)
    c = PROOF_CONSTANTS
    checked = 0
    while checked < 15:
        u, v = (int(x) for x in rng.integers(0, n, size=2))
        t = math.dist(g.points[u], g.points[v])
        if u == v or t <= 3 * r:
            continue
        delta = default_delta(n, r, t)
        alpha = min(c.B * math.sqrt(delta) * r ** (1 / 3), c.B * math.sqrt(c.F) * r)
        pl = fit_strip(g.points[u], g.points[v], alpha, n)
        res = greedy_strip_path(g, pl, delta, u=u, v=v, enforce_range=False)
        ch = res.chain
        x_prev = a_prev = 0.0
        for x_i, a_i in zip(ch.x, ch.a):
            assert x_i == pytest.approx(x_prev + ch.rho - a_i, abs=1e-9)
            assert -1e-12 <= a_i <= ch.rho - a_prev + 1e-12
            x_prev, a_prev = x_i, a_i
        rects = ch.rectangles()
        for (lo1, hi1), (lo2, hi2) in zip(rects, rects[1:]):
            assert hi1 <= lo2 + 1e-9  # disjoint, in order
        assert ch.telescoped_x() == pytest.approx(ch.last_x, abs=1e-8)
        assert res.status == SUCCESS
        d = bfs_distance(g, u, v).hops
        assert d <= res.hops <= res.budget_k
        hops = np.diff(g.points[res.path], axis=0)
        assert np.all(np.sum(hops ** 2, axis=1) <= r * r)
        checked += 1


def test_lower_certificate_on_empty_strip():
    g = graph_of([[0.0, 0.0], [9.0, 0.0], [4.0, 7.0]], 2.0)
    k = 4
    pl = strip_frame(g.points[0], g.points[1], 0.5)
    cert = lower_chain_certificate(g, pl, k)
    assert cert.certified
    assert cert.chain.last_x < 9.0
    assert not bfs_distance(g, 0, 1).reachable or bfs_distance(g, 0, 1).hops > k


def test_lower_certificate_identity_and_soundness():
    bad = 0
    for trial in range(200):
        inst = sample_uniform(60, 1.6, SeedSpec(90, trial))
        g = build_graph(inst)
        rng = np.random.default_rng(trial)
        u, v = (int(x) for x in rng.choice(60, size=2, replace=False))
        t = math.dist(g.points[u], g.points[v])
        d = bfs_distance(g, u, v).hops
        for k in range(1, 6):
            alpha = lower_alpha(t, g.r, k)
            pl = strip_frame(g.points[u], g.points[v], alpha)
            cert = lower_chain_certificate(g, pl, k)
            ch = cert.chain
            assert ch.last_x == pytest.approx(k * g.r - math.fsum(ch.a), abs=1e-9)
            assert cert.precondition == strip_precondition(t, k, g.r, alpha)
            if cert.proves_distance_exceeds_k and d is not None and d <= k:
                bad += 1
    assert bad == 0


def test_lower_certificate_rejects_bad_k():
    g = graph_of([[0.0, 0.0], [3.0, 0.0]], 2.0)
    pl = strip_frame(g.points[0], g.points[1], 0.5)
    with pytest.raises(ValueError):
        lower_chain_certificate(g, pl, 0)


def test_shortfall_law():
    alpha, r = 1.0, 2.0
    beta = np.array([0.0, 1 / (2 * alpha), r + 1e-9])
    law = empirical_shortfall_law(25.0, alpha, r, trials=10_000, master_seed=3, beta=beta)
    assert law.empirical[0] == 1.0
    assert law.empirical[2] == 0.0
    p = math.exp(-1)
    assert abs(law.empirical[1] - p) <= 3 * math.sqrt(p * (1 - p) / 10_000)
    assert law.within().all()
