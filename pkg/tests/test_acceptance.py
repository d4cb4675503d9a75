"""Acceptance criteria 1-11. Each test records one PASS/FAIL line, printed in the
"acceptance criteria" section at the end of the pytest run.

Run just this suite with ``pytest tests/test_acceptance.py``. Criteria 7-9 work on
graphs with a million vertices and take a few minutes.
"""

import itertools
import math
import time

import networkx as nx
import numpy as np
import pytest

from rgghops.bounds import (
    BoundParams,
    bound_report,
    connectivity_threshold,
    diameter_bound,
    upper_applicability_radius,
)
from rgghops.concentration import LOWER, UPPER, TailQuery, failure_probability_upper, monte_carlo_tail
from rgghops.geometry import rect_connectivity_width, strip_frame, strip_precondition, to_strip_frame
from rgghops.harness import STRIP_PATH, THRESHOLD, VERIFY, ExperimentConfig, run_experiment
from rgghops.sampler import UNIFORM, RggInstance, SeedSpec, sample_uniform
from rgghops.spatial_graph import BOUNDED, build_graph, corner_vertices, diameter
from rgghops.strip_path import lower_alpha, lower_chain_certificate

MASTER_SEED = 20240601


def test_criterion_01_deterministic_hop_floor(acceptance):
    t0 = time.perf_counter()
    cfg = ExperimentConfig(
        VERIFY, n_list=[1000, 10_000], r_list=["rc", "2*rc", "5*rc"],
        trials=10, pairs_per_trial=100, master_seed=MASTER_SEED,
    )
    rows = run_experiment(cfg)["rows"]
    reach = [r for r in rows if r["d_G"] is not None]
    bad = sum(r["d_G"] < math.ceil(r["d_E"] / r["r"]) for r in reach)
    secs = time.perf_counter() - t0
    ok = bad == 0 and secs < 60
    acceptance(1, ok, f"{len(reach)} reachable pairs, {bad} below ceil(d_E/r), "
                      f"{len(rows) - len(reach)} unreachable excluded, {secs:.1f}s")
    assert ok


def test_criterion_02_adjacency_oracle(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(MASTER_SEED)
    mismatches = 0
    for i in range(20):
        n = int(rng.integers(50, 2001))
        r = float(rng.uniform(0.3, 4.0)) * connectivity_threshold(n)
        inst = sample_uniform(n, r, SeedSpec(MASTER_SEED, i))
        p = inst.points
        d = p[:, None, :] - p[None, :, :]
        adj = (d[..., 0] ** 2 + d[..., 1] ** 2) <= r * r
        np.fill_diagonal(adj, False)
        ref = np.argwhere(np.triu(adj))
        mismatches += not np.array_equal(build_graph(inst).edge_array(), ref)
    secs = time.perf_counter() - t0
    ok = mismatches == 0 and secs < 60
    acceptance(2, ok, f"20 instances, {mismatches} adjacency mismatches, {secs:.1f}s")
    assert ok


def test_criterion_03_rectangle_connectivity(acceptance):
    rng = np.random.default_rng(MASTER_SEED + 3)
    m = 100_000
    r = rng.uniform(1e-3, 1e3, m)
    alpha = r * rng.uniform(0, 1, m)
    rho = np.array([rect_connectivity_width(a, b) for a, b in zip(r, alpha)])
    p = np.column_stack([rng.uniform(0, 1, m) * rho, rng.uniform(0, 1, m) * alpha])
    q = np.column_stack([rng.uniform(0, 1, m) * rho, rng.uniform(0, 1, m) * alpha])
    d_pq = np.hypot(*(p - q).T)
    d_corner = np.hypot(rho, alpha)  # (0,0) to (rho, alpha), the extremal pair
    worst = float(max((d_pq - r).max(), (d_corner - r).max()))
    ok = worst <= 1e-9
    acceptance(3, ok, f"{m} draws + extremal corners, max d_E - r = {worst:.3g}")
    assert ok


def _strip_instance(rng):
    k = int(rng.integers(1, 5))
    r = float(rng.uniform(0.5, 3.0))
    t = float(rng.uniform(max(k - 1, 0.2) * r, k * r))
    # narrowest strip the precondition allows, sometimes a little wider
    alpha = math.sqrt((k * r - t) * k * r / 2) * float(rng.uniform(1.0, 1.3))
    alpha = max(alpha, 1e-3)
    m_extra = int(rng.integers(1, 11))
    xs = rng.uniform(-0.5 * r, t + 0.5 * r, m_extra)
    # half the extra points hug the segment, the rest scatter around it
    spread = np.where(rng.random(m_extra) < 0.5, alpha, 2 * alpha + 0.3 * r)
    ys = rng.normal(0, 1, m_extra) * spread
    local = np.vstack([[0.0, 0.0], [t, 0.0], np.column_stack([xs, ys])])
    theta = float(rng.uniform(0, 2 * math.pi))
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    pts = local @ rot.T
    pts -= pts.mean(axis=0)
    side = 2 * float(np.abs(pts).max()) + 1
    inst = RggInstance(n=side * side, r=r, model=UNIFORM, points=pts)
    return inst, k, t, alpha


def test_criterion_04_strip_containment(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(MASTER_SEED + 4)
    outside = 0
    with_paths = 0
    paths_seen = 0
    for _ in range(1000):
        inst, k, t, alpha = _strip_instance(rng)
        assert strip_precondition(t, k, inst.r, alpha)
        g = build_graph(inst)
        G = nx.Graph()
        G.add_nodes_from(range(len(g)))
        G.add_edges_from(map(tuple, g.edge_array()))
        pl = strip_frame(g.points[0], g.points[1], alpha)
        y = to_strip_frame(pl, g.points)[:, 1]
        found = False
        for path in nx.all_simple_paths(G, 0, 1, cutoff=k):
            found = True
            paths_seen += 1
            outside += int(np.count_nonzero(np.abs(y[path]) > alpha + 1e-9))
        with_paths += found
    secs = time.perf_counter() - t0
    ok = outside == 0 and with_paths > 0 and secs < 60
    acceptance(4, ok, f"1000 instances ({with_paths} with a short path, {paths_seen} paths), "
                      f"{outside} path vertices outside |y|<=alpha, {secs:.1f}s")
    assert ok


def test_criterion_05_certificate_soundness(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(MASTER_SEED + 5)
    contradictions = 0
    checked = 0
    certified = 0
    for i in range(1000):
        n = int(rng.integers(20, 120))
        r = float(rng.uniform(0.8, 2.5)) * connectivity_threshold(n)
        g = build_graph(sample_uniform(n, r, SeedSpec(MASTER_SEED + 5, i)))
        u, v = (int(x) for x in rng.choice(n, size=2, replace=False))
        t = math.dist(g.points[u], g.points[v])
        lv = g.bfs_levels(u, target=v)
        d = int(lv[v]) if lv[v] >= 0 else None
        for k in range(1, 7):
            cert = lower_chain_certificate(g, strip_frame(g.points[u], g.points[v], lower_alpha(t, r, k)), k)
            if cert.precondition:
                checked += 1
                certified += cert.certified
                if cert.certified and d is not None and d <= k:
                    contradictions += 1
    secs = time.perf_counter() - t0
    ok = contradictions == 0 and secs < 60
    acceptance(5, ok, f"{checked} (instance, k) cases with the precondition, {certified} certified, "
                      f"{contradictions} contradicted by BFS, {secs:.1f}s")
    assert ok


def test_criterion_06_concentration(acceptance):
    t0 = time.perf_counter()
    cells = []
    for N in (1, 10, 50, 200):
        for delta, sides in ((0.1, (UPPER, LOWER)), (0.5, (UPPER, LOWER)), (1.0, (UPPER,))):
            for side in sides:
                seed = SeedSpec(MASTER_SEED + 6, len(cells))
                cells.append(monte_carlo_tail(TailQuery(N, delta, side=side), 100_000, seed))
    failed = [c for c in cells if not c.passed]
    ref = next(c for c in cells if c.query.N == 50 and c.query.delta == 0.5 and c.query.side == UPPER)
    secs = time.perf_counter() - t0
    ok = not failed and abs(ref.analytic_bound - 0.00885) < 1e-5 and secs < 120
    acceptance(6, ok, f"{len(cells)} cells x 1e5 trials, {len(failed)} above bound + 3 sigma; "
                      f"N=50 d=0.5 bound {ref.analytic_bound:.5f} vs empirical {ref.empirical:.5f}, {secs:.1f}s")
    assert ok


# -- n = 10^6 -----------------------------------------------------------------

BIG_N = 1_000_000
BIG_TRIALS = 10


@pytest.fixture(scope="module")
def upper_regime_runs():
    """Criteria 7 and 9 share their instances: r = 70 sqrt(log n), 10 trials."""
    r = upper_applicability_radius(BIG_N)
    out = []
    for trial in range(BIG_TRIALS):
        seed = SeedSpec(MASTER_SEED + 7, trial)
        g = build_graph(sample_uniform(BIG_N, r, seed))
        rng = seed.rng(tag=1)
        pairs = []
        while len(pairs) < 50:
            u, v = (int(x) for x in rng.integers(0, BIG_N, size=2))
            if u != v:
                pairs.append((u, v))
        c = [x for x in corner_vertices(g) if x is not None]
        pairs += list(itertools.combinations(c, 2))
        reports = []
        for u, v in pairs:
            lv = g.bfs_levels(u, target=v)
            d_g = int(lv[v]) if lv[v] >= 0 else None
            reports.append(bound_report(BoundParams(BIG_N, r, math.dist(g.points[u], g.points[v])), d_g))
        est = diameter(g, BOUNDED)
        out.append((reports, est))
        del g
    return r, out


def test_criterion_07_upper_bound(acceptance, upper_regime_runs):
    r, runs = upper_regime_runs
    reports = [rep for reps, _ in runs for rep in reps]
    applicable = [rep for rep in reports if rep.upper_applicable and rep.d_G_observed is not None]
    violations = sum(not rep.upper_satisfied for rep in applicable)
    unreachable = sum(rep.d_G_observed is None for rep in reports)
    diag = bound_report(BoundParams(BIG_N, 260.17, 1414.21), None).upper_value
    ok = violations == 0 and len(applicable) == len(reports) and diag == 6
    acceptance(7, ok, f"r={r:.4f}: {len(applicable)} pairs, {violations} violations, "
                      f"{unreachable} unreachable; diagonal reference {diag} hops")
    assert ok


def test_criterion_08_lower_bound(acceptance):
    r = connectivity_threshold(BIG_N)
    reports = []
    for trial in range(BIG_TRIALS):
        g = build_graph(sample_uniform(BIG_N, r, SeedSpec(MASTER_SEED + 8, trial)))
        c = corner_vertices(g)
        present = [x for x in c if x is not None]
        sources = {}
        for u, v in itertools.combinations(present, 2):
            sources.setdefault(u, []).append(v)
        for u, targets in sources.items():
            lv = g.bfs_levels(u)
            for v in targets:
                d_g = int(lv[v]) if lv[v] >= 0 else None
                reports.append(bound_report(BoundParams(BIG_N, r, math.dist(g.points[u], g.points[v])), d_g))
        del g
    reach = [rep for rep in reports if rep.d_G_observed is not None]
    applicable = [rep for rep in reach if rep.lower_applicable]
    violations = sum(not rep.lower_satisfied for rep in applicable)
    ok = violations == 0 and len(applicable) == len(reach) and len(reach) > 0
    acceptance(8, ok, f"r={r:.4f}: {len(reports)} corner pairs, {len(reach)} reachable, "
                      f"{len(applicable)} applicable, {violations} violations")
    assert ok


def test_criterion_09_diameter(acceptance, upper_regime_runs):
    r, runs = upper_regime_runs
    bound = diameter_bound(BIG_N, r)
    brackets = [(est.lower, est.upper) for _, est in runs]
    bad = sum(hi > bound.ceiling for _, hi in brackets)
    ok = bad == 0 and bound.applicable and bound.ceiling == 6
    acceptance(9, ok, f"r={r:.4f}: ceiling {bound.ceiling} (value {bound.value:.4f}); "
                      f"brackets {sorted(set(brackets))}; {bad} above the ceiling")
    assert ok


def test_criterion_10_greedy_builder(acceptance):
    t0 = time.perf_counter()
    n = 10_000
    cfg = ExperimentConfig(STRIP_PATH, n_list=[n], r_list=["5*rc"], trials=20, pairs_per_trial=20,
                           master_seed=MASTER_SEED + 10)
    rep = run_experiment(cfg)
    rows = rep["rows"]
    succ = [row for row in rows if row["status"] == "success"]
    invalid = sum(not row["valid"] for row in succ)
    r = rows[0]["r"]
    t_mid = float(np.median([row["t"] for row in rows]))
    delta_mid = float(np.median([row["delta"] for row in rows]))
    fail_bound = failure_probability_upper(t_mid, r, n, delta_mid, enforce_range=False)
    secs = time.perf_counter() - t0
    ok = invalid == 0 and len(rows) == 400 and secs < 120
    acceptance(10, ok, f"{len(succ)}/{len(rows)} greedy successes, {invalid} invalid; "
                       f"failure bound at median (t, delta) = {fail_bound.value:.3g} "
                       f"(informational), {secs:.1f}s")
    assert ok


def test_criterion_11_connectivity_threshold(acceptance):
    t0 = time.perf_counter()
    factors = np.linspace(0.5, 2.0, 10)
    toks = [f"{float(f)!r}*rc" for f in factors]
    rep = run_experiment(ExperimentConfig(THRESHOLD, n_list=[10_000], r_list=toks, trials=50,
                                          master_seed=MASTER_SEED + 11))
    cell = rep["summary"]["cells"][0]
    sweep = cell["sweep"]
    low, high = sweep[0]["connected_frequency"], sweep[-1]["connected_frequency"]
    secs = time.perf_counter() - t0
    ok = high >= 0.98 and low <= 0.02 and cell["monotone"] and secs < 120
    freqs = " ".join(f"{s['connected_frequency']:.2f}" for s in sweep)
    acceptance(11, ok, f"frequency at 0.5rc={low:.2f}, 2rc={high:.2f}, monotone={cell['monotone']}; "
                       f"sweep [{freqs}], {secs:.1f}s")
    assert ok
