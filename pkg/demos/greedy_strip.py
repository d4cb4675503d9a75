"""The constructive side: a greedy path inside a thin strip.

Between two far vertices we lay a strip of width alpha along the segment and
walk it rectangle by rectangle, always jumping to the rightmost vertex that is
still within reach. Each step falls short of the ideal advance by a shortfall
a_i; the sum of the shortfalls is what the hop budget pays for.
"""

import math

import numpy as np

import rgghops as rh
from rgghops.strip_path import default_delta

n = 10_000
r = 5 * rh.connectivity_threshold(n)
g = rh.build_graph(rh.sample_uniform(n, r, rh.SeedSpec(7)))
c = rh.PROOF_CONSTANTS

u, v = rh.corner_vertices(g).sw, rh.corner_vertices(g).ne
t = math.dist(g.points[u], g.points[v])
delta = default_delta(n, r, t)
# At desk scale delta sits above F r^{4/3}; cap alpha at the top of the range.
alpha = min(c.B * math.sqrt(delta) * r ** (1 / 3), c.B * math.sqrt(c.F) * r)
placement = rh.fit_strip(g.points[u], g.points[v], alpha, n)
res = rh.greedy_strip_path(g, placement, delta, u=u, v=v, enforce_range=False)

print(f"t={t:.1f}  r={r:.2f}  alpha={alpha:.2f}  rho={res.chain.rho:.2f}  side={placement.side}")
print(f"status={res.status}  greedy hops={res.hops}  budget={res.budget_k}  "
      f"BFS={rh.bfs_distance(g, u, v).hops}  ceil(t/r)={math.ceil(t / r)}")

a = np.array(res.chain.a)
print(f"shortfalls: mean {a.mean():.3f}, max {a.max():.3f}; "
      f"an untruncated Exp(alpha) would have mean 1/alpha = {1 / alpha:.3f}")

# %% the shortfall of the first rectangle against exp(-2 alpha beta)
law = rh.empirical_shortfall_law(64.0, 1.0, 2.0, trials=5000, master_seed=1)
for b, e, th in zip(law.beta, law.empirical, law.theoretical):
    print(f"  beta={b:.2f}  empirical={e:.4f}  exp(-2 alpha beta)={th:.4f}")
