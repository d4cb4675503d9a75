"""Hop count against Euclidean distance in one random geometric graph.

Samples n points in the square of area n, joins pairs closer than r, and
compares BFS hop counts with d_E/r and with the two closed-form bounds.
"""

import math

import numpy as np

import rgghops as rh

n = 20_000
r = 3 * rh.connectivity_threshold(n)
inst = rh.sample_uniform(n, r, rh.SeedSpec(2024))
g = rh.build_graph(inst)
print(f"n={n}  r={r:.3f}  edges={g.n_edges}  connected={rh.is_connected(g)}")

# %% hop count vs distance for random pairs
rng = np.random.default_rng(0)
stretch = []
for _ in range(200):
    u, v = rng.integers(0, n, size=2)
    if u == v:
        continue
    d_e = math.dist(g.points[u], g.points[v])
    res = rh.bfs_distance(g, int(u), int(v))
    if res.reachable and d_e > 5 * r:
        stretch.append(res.hops / (d_e / r))
print(f"mean stretch d_G / (d_E/r) over far pairs: {np.mean(stretch):.3f}")
print(f"worst stretch: {max(stretch):.3f}   best: {min(stretch):.3f}")

# %% corner to corner, where the lower bound applies
c = rh.corner_vertices(g)
res = rh.bfs_distance(g, c.sw, c.ne, want_path=True)
d_e = math.dist(g.points[c.sw], g.points[c.ne])
rep = rh.bound_report(rh.BoundParams(n, r, d_e), res.hops)
print(f"sw -> ne: d_E={d_e:.1f}  d_G={res.hops}  ceil(d_E/r)={math.ceil(d_e / r)}")
print(f"  lower bound {rep.lower_value:.2f} (applicable={rep.lower_applicable})")
print(f"  upper bound {rep.upper_value} (applicable={rep.upper_applicable}, needs r >= "
      f"{rh.upper_applicability_radius(n):.1f})")
