"""Geometric graph over a point set, backed by a cell grid of side ``r``.

Two storage modes:

* ``eager`` -- CSR adjacency (``indptr``/``indices``, neighbour lists sorted by
  vertex index). Memory is about ``n * pi * r**2`` indices, so this is the mode
  for graphs near the connectivity threshold.
* ``lazy`` -- no adjacency is stored; neighbourhoods come from the grid on
  demand and BFS runs level by level over a fine covering grid. Use it when
  ``pi * r**2`` is in the thousands and the edge list would not fit in memory.

BFS is level-synchronous in both modes. The predecessor of a vertex on a
reported path is the smallest-index vertex on the previous level adjacent to it,
so paths are deterministic and identical across modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import ndimage
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .sampler import RggInstance

EAGER = "eager"
LAZY = "lazy"
AUTO = "auto"

EXACT = "exact"
BOUNDED = "bounded"
EXACT_DIAMETER_CUTOFF = 5000

# auto mode stores adjacency while the expected degree stays below this.
AUTO_EAGER_MAX_DEGREE = 400.0
MAX_GRID_CELLS = 1 << 22
_CHUNK = 1 << 18


class DisconnectedGraph(ValueError):
    pass


class CellGrid:
    """Bucket points into square cells of side ``cell_side``.

    ``cell_side`` is ``r`` unless that would need more than ``MAX_GRID_CELLS``
    cells, in which case it is enlarged (a 3x3 neighbourhood still covers every
    point within ``r``).
    """

    def __init__(self, points: np.ndarray, n: float, r: float):
        self.half = math.sqrt(n) / 2.0
        side = 2.0 * self.half
        cell = float(r)
        if side / cell > math.sqrt(MAX_GRID_CELLS):
            cell = side / math.floor(math.sqrt(MAX_GRID_CELLS))
        self.cell_side = cell
        self.columns = self.rows = max(1, math.ceil(side / cell))
        pts = np.asarray(points, dtype=float)
        self.ix = self._coord(pts[:, 0])
        self.iy = self._coord(pts[:, 1])
        cell_id = self.ix.astype(np.int64) * self.rows + self.iy
        self.order = np.argsort(cell_id, kind="stable")
        counts = np.bincount(cell_id, minlength=self.columns * self.rows)
        self.starts = np.zeros(len(counts) + 1, dtype=np.int64)
        np.cumsum(counts, out=self.starts[1:])

    def _coord(self, x: np.ndarray) -> np.ndarray:
        c = np.floor((x + self.half) / self.cell_side).astype(np.int64)
        return np.clip(c, 0, self.columns - 1)

    def cell_of(self, p) -> tuple[int, int]:
        return int(self._coord(np.array([p[0]]))[0]), int(self._coord(np.array([p[1]]))[0])

    def bucket(self, cx: int, cy: int) -> np.ndarray:
        if not (0 <= cx < self.columns and 0 <= cy < self.rows):
            return np.empty(0, dtype=np.int64)
        c = cx * self.rows + cy
        return self.order[self.starts[c]:self.starts[c + 1]]

    def neighbourhood(self, cx: int, cy: int) -> np.ndarray:
        """Indices of all points in the 3x3 block of cells around ``(cx, cy)``."""
        parts = [
            self.bucket(cx + dx, cy + dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)
        ]
        return np.concatenate(parts)


def _expand_ranges(starts: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Concatenate ``arange(s, s + c)`` for every pair, vectorised."""
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    shift = np.repeat(starts - (np.cumsum(counts) - counts), counts)
    return np.arange(total, dtype=np.int64) + shift


def _grid_edges(points: np.ndarray, grid: CellGrid, r2: float):
    """Yield ``(src, dst)`` chunks, each undirected edge once with ``src != dst``."""
    order = grid.order
    xs = points[order, 0]
    ys = points[order, 1]
    ixs = grid.ix[order]
    iys = grid.iy[order]
    m = len(order)
    # Half shell: the cell itself (later positions only) plus four forward neighbours.
    for dx, dy in ((0, 0), (1, -1), (1, 0), (1, 1), (0, 1)):
        for lo in range(0, m, _CHUNK):
            pos = np.arange(lo, min(m, lo + _CHUNK), dtype=np.int64)
            cx = ixs[pos] + dx
            cy = iys[pos] + dy
            ok = (cx >= 0) & (cx < grid.columns) & (cy >= 0) & (cy < grid.rows)
            pos, cx, cy = pos[ok], cx[ok], cy[ok]
            c2 = cx * grid.rows + cy
            s = grid.starts[c2]
            e = grid.starts[c2 + 1]
            if dx == 0 and dy == 0:
                s = pos + 1
            cnt = np.maximum(e - s, 0)
            dst = _expand_ranges(s, cnt)
            if dst.size == 0:
                continue
            src = np.repeat(pos, cnt)
            ddx = xs[src] - xs[dst]
            ddy = ys[src] - ys[dst]
            keep = ddx * ddx + ddy * ddy <= r2
            yield order[src[keep]], order[dst[keep]]


class GeoGraph:
    """Immutable geometric graph: edge ``(i, j)`` iff ``|p_i - p_j|**2 <= r**2``."""

    def __init__(self, instance: RggInstance, adjacency: str = AUTO):
        if not instance.r > 0:
            raise ValueError(f"r must be positive to build a graph, got {instance.r}")
        self.instance = instance
        self.points = instance.points
        self.r = float(instance.r)
        self.r2 = self.r * self.r
        self.grid = CellGrid(self.points, instance.n, self.r)
        if adjacency == AUTO:
            adjacency = EAGER if math.pi * self.r2 <= AUTO_EAGER_MAX_DEGREE else LAZY
        if adjacency not in (EAGER, LAZY):
            raise ValueError(f"unknown adjacency mode {adjacency!r}")
        self.adjacency = adjacency
        self.indptr: Optional[np.ndarray] = None
        self.indices: Optional[np.ndarray] = None
        if adjacency == EAGER:
            self.indptr, self.indices = self._build_csr()
        self._coverage = None

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n_vertices(self) -> int:
        return len(self.points)

    def _build_csr(self):
        m = len(self.points)
        keys = []
        for a, b in _grid_edges(self.points, self.grid, self.r2):
            keys.append(a * m + b)
            keys.append(b * m + a)
        key = np.sort(np.concatenate(keys)) if keys else np.empty(0, dtype=np.int64)
        src = key // m
        indices = (key - src * m).astype(np.int32 if m < 2**31 else np.int64)
        indptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=m), out=indptr[1:])
        return indptr, indices

    @property
    def n_edges(self) -> int:
        if self.indptr is not None:
            return int(self.indptr[-1] // 2)
        return int(sum(len(a) for a, _ in _grid_edges(self.points, self.grid, self.r2)))

    def neighbors(self, i: int) -> np.ndarray:
        """Sorted neighbour indices of vertex ``i``."""
        self._check_index(i)
        if self.indptr is not None:
            return self.indices[self.indptr[i]:self.indptr[i + 1]].astype(np.int64)
        cand = self.grid.neighbourhood(int(self.grid.ix[i]), int(self.grid.iy[i]))
        d = self.points[cand] - self.points[i]
        keep = (d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] <= self.r2) & (cand != i)
        return np.sort(cand[keep])

    def degree(self, i: int) -> int:
        if self.indptr is not None:
            return int(self.indptr[i + 1] - self.indptr[i])
        return len(self.neighbors(i))

    def edge_array(self) -> np.ndarray:
        """All edges as an ``(m, 2)`` array with ``src < dst``, sorted."""
        parts = [np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1)
                 for a, b in _grid_edges(self.points, self.grid, self.r2)]
        if not parts:
            return np.empty((0, 2), dtype=np.int64)
        e = np.concatenate(parts)
        return e[np.lexsort((e[:, 1], e[:, 0]))]

    def to_csr_matrix(self) -> csr_matrix:
        if self.indptr is None:
            raise ValueError("sparse matrix export needs eager adjacency")
        m = len(self.points)
        data = np.ones(len(self.indices), dtype=np.int8)
        return csr_matrix((data, self.indices, self.indptr), shape=(m, m))

    def _check_index(self, i):
        if not (0 <= int(i) < len(self.points)) or int(i) != i:
            raise IndexError(f"vertex index {i} out of range [0, {len(self.points)})")

    # -- BFS -------------------------------------------------------------

    def bfs_levels(self, source: int, target: Optional[int] = None) -> np.ndarray:
        """Hop distance from ``source`` to every vertex (-1 if unreachable).

        With ``target`` given, the search stops once the target's level is known;
        levels beyond it are then left at -1.
        """
        self._check_index(source)
        if target is not None:
            self._check_index(target)
        if self.indptr is not None:
            return _bfs_csr(self.indptr, self.indices, int(source), target)
        if self._coverage is None:
            self._coverage = _CoverageGrid(self)
        return self._coverage.bfs(int(source), target)

    def predecessor(self, node: int, levels: np.ndarray) -> int:
        nb = self.neighbors(node)
        prev = nb[levels[nb] == levels[node] - 1]
        return int(prev.min())

    def path_from_levels(self, levels: np.ndarray, target: int) -> list[int]:
        if levels[target] < 0:
            raise ValueError("target unreachable")
        path = [int(target)]
        while levels[path[-1]] > 0:
            path.append(self.predecessor(path[-1], levels))
        return path[::-1]


def _bfs_csr(indptr, indices, source, target=None) -> np.ndarray:
    m = len(indptr) - 1
    level = np.full(m, -1, dtype=np.int64)
    level[source] = 0
    frontier = np.array([source], dtype=np.int64)
    depth = 0
    while frontier.size:
        if target is not None and level[target] >= 0:
            break
        depth += 1
        st = indptr[frontier]
        cnt = indptr[frontier + 1] - st
        nb = indices[_expand_ranges(st, cnt)]
        nb = nb[level[nb] < 0]
        frontier = np.unique(nb).astype(np.int64)
        level[frontier] = depth
    return level


class _CoverageGrid:
    """BFS without stored adjacency, for dense graphs.

    Points are bucketed into fine cells of side ``s``. For a cell whose index
    offset to the nearest frontier cell has Euclidean length ``D``, every pair of
    points between the two cells is at distance at most ``s*(D + sqrt 2)`` and at
    least ``s*(D - sqrt 2)``. Cells of the first kind (within a relative safety
    margin) join the next level wholesale; cells of the second kind are out of
    reach; only the thin band between gets an exact nearest-frontier check.
    """

    def __init__(self, g: GeoGraph, refine: int = 64, max_side_cells: int = 512):
        self.g = g
        pts = g.points
        half = g.grid.half
        side = 2.0 * half
        s = max(g.r / refine, side / max_side_cells)
        self.s = s
        self.G = max(1, math.ceil(side / s))
        fx = np.clip(np.floor((pts[:, 0] + half) / s).astype(np.int64), 0, self.G - 1)
        fy = np.clip(np.floor((pts[:, 1] + half) / s).astype(np.int64), 0, self.G - 1)
        self.cell = fx * self.G + fy
        self.full_reach = g.r * (1.0 - 1e-9) / s - math.sqrt(2.0)
        self.part_reach = g.r * (1.0 + 1e-9) / s + math.sqrt(2.0)

    def _cell_distance(self, cells: np.ndarray) -> np.ndarray:
        """Index-space distance from every cell to the nearest cell in ``cells``."""
        mask = np.ones(self.G * self.G, dtype=bool)
        mask[cells] = False
        return ndimage.distance_transform_edt(mask.reshape(self.G, self.G)).ravel()

    def bfs(self, source: int, target: Optional[int] = None) -> np.ndarray:
        g = self.g
        pts = g.points
        m = len(pts)
        level = np.full(m, -1, dtype=np.int64)
        level[source] = 0
        unvisited = np.ones(m, dtype=bool)
        unvisited[source] = False
        frontier = np.array([source], dtype=np.int64)
        depth = 0
        remaining = np.flatnonzero(unvisited)
        while frontier.size and remaining.size:
            if target is not None and level[target] >= 0:
                break
            depth += 1
            dist = self._cell_distance(self.cell[frontier])
            rd = dist[self.cell[remaining]]
            new_full = remaining[rd <= self.full_reach]
            cand = remaining[(rd > self.full_reach) & (rd <= self.part_reach)]
            if cand.size:
                # Only frontier points near some candidate cell can matter.
                cdist = self._cell_distance(self.cell[cand])
                fr = frontier[cdist[self.cell[frontier]] <= self.part_reach]
                tree = cKDTree(pts[fr])
                _, j = tree.query(pts[cand], k=1, distance_upper_bound=g.r * (1 + 1e-9))
                hit = j < len(fr)
                c_hit = cand[hit]
                diff = pts[c_hit] - pts[fr[j[hit]]]
                ok = diff[:, 0] * diff[:, 0] + diff[:, 1] * diff[:, 1] <= g.r2
                new = np.concatenate([new_full, c_hit[ok]])
                new.sort()
            else:
                new = new_full
            level[new] = depth
            unvisited[new] = False
            remaining = remaining[unvisited[remaining]]
            frontier = new
        return level


# -- public operations ---------------------------------------------------


def build_graph(instance: RggInstance, adjacency: str = AUTO) -> GeoGraph:
    return GeoGraph(instance, adjacency)


@dataclass(frozen=True)
class DistanceResult:
    source: int
    target: int
    hops: Optional[int]
    path: Optional[list] = None

    @property
    def reachable(self) -> bool:
        return self.hops is not None


def bfs_distance(g: GeoGraph, u: int, v: int, want_path: bool = False) -> DistanceResult:
    """Exact hop count between ``u`` and ``v``; ``hops is None`` when unreachable."""
    levels = g.bfs_levels(u, target=v)
    if levels[v] < 0:
        return DistanceResult(int(u), int(v), None, None)
    path = g.path_from_levels(levels, v) if want_path else None
    return DistanceResult(int(u), int(v), int(levels[v]), path)


def component_labels(g: GeoGraph) -> np.ndarray:
    m = len(g)
    labels = np.full(m, -1, dtype=np.int64)
    comp = 0
    for s in range(m):
        if labels[s] >= 0:
            continue
        lv = g.bfs_levels(s)
        labels[lv >= 0] = comp
        comp += 1
    return labels


def is_connected(g: GeoGraph) -> bool:
    if len(g) == 0:
        raise ValueError("graph has no vertices")
    return bool(np.all(g.bfs_levels(0) >= 0))


@dataclass(frozen=True)
class DiameterEstimate:
    mode: str
    lower: int
    upper: int
    bfs_runs: int = 0

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")
        if self.mode == EXACT and self.lower != self.upper:
            raise ValueError("exact estimate must have lower == upper")

    @property
    def exact(self) -> bool:
        return self.lower == self.upper


def _farthest(levels: np.ndarray) -> tuple[int, int]:
    ecc = int(levels.max())
    return int(np.flatnonzero(levels == ecc)[0]), ecc


def _point_set_diameter_sq(points: np.ndarray) -> float:
    """Largest squared pairwise distance, taken over the convex hull vertices."""
    if len(points) > 16:
        try:
            points = points[ConvexHull(points).vertices]
        except QhullError:  # all points collinear
            pass
    d = points[:, None, :] - points[None, :, :]
    return float((d[..., 0] ** 2 + d[..., 1] ** 2).max())


def diameter(g: GeoGraph, mode: str = EXACT, sweeps: int = 2, max_bfs: int = 64) -> DiameterEstimate:
    """Exact diameter (all-source BFS, up to ``EXACT_DIAMETER_CUTOFF`` vertices) or a bracket.

    The bracket starts from double sweeps: every BFS gives ``ecc(x) <= diam <= 2*ecc(x)``,
    and midpoints of the sweep paths are good centres for the upper side. It is then
    tightened iFUB-style from the best centre, processing fringe levels from the
    outside in, until it closes or ``max_bfs`` searches have been spent.
    """
    m = len(g)
    if m == 0:
        raise ValueError("graph has no vertices")
    if mode == EXACT:
        if m > EXACT_DIAMETER_CUTOFF:
            raise ValueError(
                f"exact diameter limited to {EXACT_DIAMETER_CUTOFF} vertices (got {m}); use bounded mode"
            )
        return _exact_diameter(g)
    if mode != BOUNDED:
        raise ValueError(f"unknown diameter mode {mode!r}")
    if m == 1:
        return DiameterEstimate(BOUNDED, 0, 0, 0)
    if _point_set_diameter_sq(g.points) <= g.r2:
        # every pair is within r: complete graph
        return DiameterEstimate(BOUNDED, 1, 1, 0)

    runs = 0
    ecc_cache = {}

    def bfs(x):
        nonlocal runs
        lv = g.bfs_levels(x)
        runs += 1
        if np.any(lv < 0):
            raise DisconnectedGraph("diameter of a disconnected graph")
        ecc_cache[x] = int(lv.max())
        return lv

    # Start from the vertex nearest the centre of the square.
    start = int(np.argmin(np.einsum("ij,ij->i", g.points, g.points)))
    lv = bfs(start)
    lower = ecc_cache[start]
    upper = 2 * ecc_cache[start]
    best_centre, best_levels = start, lv
    a, _ = _farthest(lv)
    for _ in range(sweeps):
        lv_a = bfs(a)
        b, ecc_a = _farthest(lv_a)
        lower = max(lower, ecc_a)
        path = g.path_from_levels(lv_a, b)
        mid = path[len(path) // 2]
        if mid not in ecc_cache:
            lv_mid = bfs(mid)
            if 2 * ecc_cache[mid] < upper:
                upper = 2 * ecc_cache[mid]
                best_centre, best_levels = mid, lv_mid
        a = b
    upper = min(upper, 2 * ecc_cache[best_centre])

    # iFUB refinement from the best centre.
    i = ecc_cache[best_centre]
    while lower < upper and i > 0 and runs < max_bfs:
        fringe = np.flatnonzero(best_levels == i)
        if runs + len(fringe) > max_bfs:
            break
        for z in fringe:
            if int(z) not in ecc_cache:
                bfs(int(z))
            lower = max(lower, ecc_cache[int(z)])
        if lower > 2 * (i - 1):
            upper = lower
            break
        upper = min(upper, max(lower, 2 * (i - 1)))
        i -= 1
    return DiameterEstimate(BOUNDED, lower, upper, runs)


def _exact_diameter(g: GeoGraph) -> DiameterEstimate:
    m = len(g)
    if g.indptr is not None:
        mat = g.to_csr_matrix()
        best = 0
        for lo in range(0, m, 256):
            idx = np.arange(lo, min(m, lo + 256))
            d = shortest_path(mat, method="D", unweighted=True, directed=False, indices=idx)
            if np.isinf(d).any():
                raise DisconnectedGraph("diameter of a disconnected graph")
            best = max(best, int(d.max()))
        return DiameterEstimate(EXACT, best, best, m)
    best = 0
    for s in range(m):
        lv = g.bfs_levels(s)
        if np.any(lv < 0):
            raise DisconnectedGraph("diameter of a disconnected graph")
        best = max(best, int(lv.max()))
    return DiameterEstimate(EXACT, best, best, m)


class Corners(NamedTuple):
    sw: Optional[int]
    se: Optional[int]
    nw: Optional[int]
    ne: Optional[int]


def corner_vertices(g: GeoGraph, side: Optional[float] = None) -> Corners:
    """For each corner square of side ``log n``, the vertex in it closest to the corner."""
    n = g.instance.n
    if side is None:
        side = math.log(n) if n > 1 else 0.0
    h = g.grid.half
    pts = g.points
    out = []
    for sx, sy in ((-1, -1), (1, -1), (-1, 1), (1, 1)):
        cx, cy = sx * h, sy * h
        dx = np.abs(pts[:, 0] - cx)
        dy = np.abs(pts[:, 1] - cy)
        inside = np.flatnonzero((dx <= side) & (dy <= side))
        if inside.size == 0:
            out.append(None)
            continue
        d2 = dx[inside] ** 2 + dy[inside] ** 2
        out.append(int(inside[np.argmin(d2)]))
    return Corners(*out)
