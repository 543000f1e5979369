"""Geometric graphs, Euclidean MST, subdivision, shortest paths and stretch checks."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra, minimum_spanning_tree
from scipy.spatial.distance import pdist

from . import _kernels
from .geometry import GeometryError, as_points


WORKERS_ENV = "LIGHTSPANNER_WORKERS"


class GraphError(ValueError):
    pass


class GeometricGraph:
    """Mutable geometric graph whose edge weights are Euclidean lengths.

    Vertices ``0..n_original-1`` are the input points when the graph is built
    with :meth:`from_points`. Any vertex may carry a hashable key; adding a
    vertex with a known key returns the existing id, which is how partial
    constructions are glued together.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self._coords: List[Tuple[float, ...]] = []
        self.steiner: List[bool] = []
        self.keys: Dict[Hashable, int] = {}
        self.edges: Dict[Tuple[int, int], float] = {}
        self._eu: List[int] = []
        self._ev: List[int] = []
        self.info: dict = {}

    @classmethod
    def from_points(cls, points) -> "GeometricGraph":
        arr = as_points(points)
        g = cls(arr.shape[1])
        for i, p in enumerate(arr.tolist()):
            g.add_vertex(p, steiner=False, key=("p", i))
        return g

    # -- construction -------------------------------------------------
    def add_vertex(self, coord, steiner: bool = True, key: Optional[Hashable] = None) -> int:
        if key is not None:
            vid = self.keys.get(key)
            if vid is not None:
                return vid
        c = tuple(float(x) for x in coord)
        if len(c) != self.dim:
            raise GeometryError(f"vertex of dimension {len(c)} added to {self.dim}-D graph")
        vid = len(self._coords)
        self._coords.append(c)
        self.steiner.append(bool(steiner))
        if key is not None:
            self.keys[key] = vid
        return vid

    def add_edge(self, u: int, v: int) -> bool:
        """Insert the edge ``u-v``; returns False for self-loops and duplicates."""
        if u == v:
            return False
        a, b = (u, v) if u < v else (v, u)
        if (a, b) in self.edges:
            return False
        pu, pv = self._coords[a], self._coords[b]
        w = math.sqrt(sum((x - y) ** 2 for x, y in zip(pu, pv)))
        if w == 0.0:
            return False
        self.edges[(a, b)] = w
        self._eu.append(a)
        self._ev.append(b)
        return True

    def add_path(self, vids: Sequence[int]) -> None:
        for a, b in zip(vids, vids[1:]):
            self.add_edge(a, b)

    def merge(self, other: "GeometricGraph") -> Dict[int, int]:
        """Union ``other`` into this graph, identifying vertices by key."""
        inv = {v: k for k, v in other.keys.items()}
        remap = {}
        for vid, c in enumerate(other._coords):
            remap[vid] = self.add_vertex(c, other.steiner[vid], inv.get(vid))
        for (a, b) in other.edges:
            self.add_edge(remap[a], remap[b])
        return remap

    def copy(self) -> "GeometricGraph":
        g = GeometricGraph(self.dim)
        g._coords = list(self._coords)
        g.steiner = list(self.steiner)
        g.keys = dict(self.keys)
        g.edges = dict(self.edges)
        g._eu = list(self._eu)
        g._ev = list(self._ev)
        return g

    # -- views --------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self._coords)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_steiner(self) -> int:
        return sum(self.steiner)

    @property
    def coords(self) -> np.ndarray:
        return np.asarray(self._coords, dtype=float).reshape(-1, self.dim)

    def coord(self, vid: int) -> Tuple[float, ...]:
        return self._coords[vid]

    def vertex(self, key: Hashable) -> int:
        return self.keys[key]

    @property
    def original_ids(self) -> List[int]:
        return [i for i, s in enumerate(self.steiner) if not s]

    def total_weight(self) -> float:
        return math.fsum(self.edges.values())

    def edge_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.edges:
            return np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0)
        # the edge dict preserves insertion order, matching the parallel id lists
        w = np.fromiter(self.edges.values(), dtype=float, count=len(self.edges))
        return np.array(self._eu, dtype=np.int64), np.array(self._ev, dtype=np.int64), w

    def csr(self) -> csr_matrix:
        u, v, w = self.edge_arrays()
        n = self.n_vertices
        return csr_matrix((np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))), shape=(n, n))

    def check_weights(self, rel_tol: float = 1e-12) -> None:
        """Raise if any stored weight differs from the Euclidean length."""
        if not self.edges:
            return
        c = self.coords
        u, v, w = self.edge_arrays()
        true = np.sqrt(((c[u] - c[v]) ** 2).sum(1))
        bad = np.abs(true - w) > rel_tol * np.maximum(true, 1e-300)
        if bad.any() or (u == v).any():
            raise GraphError(f"{int(bad.sum())} edges violate the Euclidean weight invariant")


class _CSR:
    """Frozen CSR arrays for numba kernels."""

    def __init__(self, g: GeometricGraph):
        m = g.csr()
        m.sort_indices()
        self.indptr = m.indptr.astype(np.int64)
        self.indices = m.indices.astype(np.int64)
        self.weights = m.data.astype(float)
        self.n = g.n_vertices


def bounded_pair_distances(g: GeometricGraph, src, tgt, limits) -> np.ndarray:
    """Graph distances for many pairs, searching each source only up to its largest limit.

    Entries beyond their limit come back as ``inf``.
    """
    src = np.asarray(src, dtype=np.int64)
    tgt = np.asarray(tgt, dtype=np.int64)
    limits = np.asarray(limits, dtype=float)
    if len(src) == 0:
        return np.empty(0)
    order = np.argsort(src, kind="stable")
    s_sorted = src[order]
    starts = np.flatnonzero(np.r_[True, s_sorted[1:] != s_sorted[:-1]])
    csr = _CSR(g)
    got = _kernels.pair_distances(
        csr.indptr, csr.indices, csr.weights, csr.n,
        s_sorted[starts], np.r_[starts, len(src)].astype(np.int64), tgt[order], limits[order],
    )
    out = np.empty_like(got)
    out[order] = got
    return out


@dataclass
class SpannerReport:
    max_stretch: float
    total_weight: float
    mst_weight: float
    lightness: float
    n_edges: int
    n_steiner: int
    elapsed: float
    n_points: int = 0
    worst_pair: Optional[Tuple[int, int]] = None
    pairs_checked: int = 0
    exact: bool = True
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


# -- MST ---------------------------------------------------------------

PRIM_LIMIT = 2_000


def _prim(arr: np.ndarray) -> List[Tuple[int, int]]:
    n = len(arr)
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    best[0] = 0.0
    edges = []
    for _ in range(n):
        cand = np.where(in_tree, np.inf, best)
        u = int(np.argmin(cand))
        in_tree[u] = True
        if parent[u] >= 0:
            edges.append((int(parent[u]), u))
        d = np.sqrt(((arr - arr[u]) ** 2).sum(1))
        upd = (~in_tree) & (d < best)
        best[upd] = d[upd]
        parent[upd] = u
    return edges


def _delaunay_mst(arr: np.ndarray) -> List[Tuple[int, int]]:
    from scipy.spatial import Delaunay

    tri = Delaunay(arr)
    s = tri.simplices
    k = s.shape[1]
    pairs = np.concatenate([s[:, [a, b]] for a in range(k) for b in range(a + 1, k)])
    pairs.sort(axis=1)
    pairs = np.unique(pairs, axis=0)
    w = np.sqrt(((arr[pairs[:, 0]] - arr[pairs[:, 1]]) ** 2).sum(1))
    n = len(arr)
    m = minimum_spanning_tree(csr_matrix((w, (pairs[:, 0], pairs[:, 1])), shape=(n, n))).tocoo()
    return list(zip(m.row.tolist(), m.col.tolist()))


def mst_edges(points) -> List[Tuple[int, int]]:
    arr = as_points(points)
    n = len(arr)
    if n == 0:
        raise GraphError("MST of an empty point set")
    if n == 1:
        return []
    if n > PRIM_LIMIT and arr.shape[1] in (2, 3):
        try:
            return _delaunay_mst(arr)
        except Exception:  # degenerate input, fall back to exact Prim
            pass
    return _prim(arr)


def mst(points) -> GeometricGraph:
    g = GeometricGraph.from_points(points)
    for u, v in mst_edges(points):
        g.add_edge(u, v)
    return g


def mst_weight(points) -> float:
    arr = as_points(points)
    return math.fsum(math.dist(arr[u], arr[v]) for u, v in mst_edges(arr))


def _is_tree(g: GeometricGraph) -> bool:
    n = g.n_vertices
    if g.n_edges != n - 1:
        return False
    if n <= 1:
        return True
    return connected_components(g.csr(), directed=False)[0] == 1


def subdivide_mst(tree: GeometricGraph, max_len: float = 1.0) -> Tuple[GeometricGraph, List[int]]:
    """Split every edge longer than ``max_len`` into ``ceil(w/max_len)`` equal pieces.

    Returns the subdivided tree and the ids of the new Steiner vertices.
    """
    if not _is_tree(tree):
        raise GraphError("subdivide_mst expects a tree")
    out = GeometricGraph(tree.dim)
    out._coords = list(tree._coords)
    out.steiner = list(tree.steiner)
    out.keys = dict(tree.keys)
    added: List[int] = []
    for (a, b), w in tree.edges.items():
        if w <= max_len:
            out.add_edge(a, b)
            continue
        k = math.ceil(w / max_len)
        pa = np.asarray(tree._coords[a])
        pb = np.asarray(tree._coords[b])
        chain = [a]
        for j in range(1, k):
            chain.append(out.add_vertex(pa + (pb - pa) * (j / k), steiner=True))
        chain.append(b)
        added.extend(chain[1:-1])
        out.add_path(chain)
    return out, added


# -- shortest paths and stretch ---------------------------------------

def shortest_path_dist(g: GeometricGraph, u: int, v: int) -> float:
    n = g.n_vertices
    if not (0 <= u < n and 0 <= v < n):
        raise GraphError(f"unknown vertex in query ({u}, {v})")
    if u == v:
        return 0.0
    return float(dijkstra(g.csr(), directed=False, indices=u)[v])


def all_pairs_dist(g: GeometricGraph) -> np.ndarray:
    return dijkstra(g.csr(), directed=False)


def _pair_ratios(g: GeometricGraph, pairs: np.ndarray, batch: int = 64) -> np.ndarray:
    """Exact d_G(u,v)/||u,v|| for each pair, grouping Dijkstra runs by source."""
    c = g.coords
    eu = np.sqrt(((c[pairs[:, 0]] - c[pairs[:, 1]]) ** 2).sum(1))
    if np.any(eu == 0):
        k = int(np.flatnonzero(eu == 0)[0])
        raise GraphError(f"pair {tuple(pairs[k])} has zero Euclidean distance")
    m = g.csr()
    srcs, inv = np.unique(pairs[:, 0], return_inverse=True)
    gd = np.empty(len(pairs))
    order = np.argsort(inv, kind="stable")
    bounds = np.searchsorted(inv[order], np.arange(len(srcs) + 1))

    def run(s0):
        s1 = min(s0 + batch, len(srcs))
        dmat = dijkstra(m, directed=False, indices=srcs[s0:s1])
        sel = order[bounds[s0]:bounds[s1]]
        gd[sel] = dmat[inv[sel] - s0, pairs[sel, 1]]

    starts = range(0, len(srcs), batch)
    workers = worker_count()
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(run, starts))
    else:
        for s0 in starts:
            run(s0)
    return gd / eu


def worker_count() -> int:
    """Verification threads, from ``LIGHTSPANNER_WORKERS`` (default 1)."""
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def verify_stretch(g: GeometricGraph, pairs, t: float = math.inf):
    """Max observed stretch over ``pairs``.

    Returns ``(max_stretch, worst_pair, ok)`` where ``ok`` says whether the
    maximum is at most ``t``.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if len(pairs) == 0:
        return 1.0, None, True
    r = _pair_ratios(g, pairs)
    k = int(np.argmax(r))
    worst = float(r[k])
    return worst, (int(pairs[k, 0]), int(pairs[k, 1])), bool(worst <= t)


def all_original_pairs(g: GeometricGraph) -> np.ndarray:
    ids = np.asarray(g.original_ids, dtype=np.int64)
    iu, ju = np.triu_indices(len(ids), k=1)
    return np.stack([ids[iu], ids[ju]], axis=1)


def sampled_original_pairs(g: GeometricGraph, n_pairs: int, seed: int = 0, n_sources: int = 500) -> np.ndarray:
    """Seed-derived sample of distinct original pairs, clustered on few sources."""
    ids = np.asarray(g.original_ids, dtype=np.int64)
    rng = np.random.default_rng(seed)
    srcs = rng.choice(ids, size=min(n_sources, len(ids)), replace=False)
    per = max(1, n_pairs // len(srcs))
    a = np.repeat(srcs, per)
    b = rng.choice(ids, size=len(a))
    keep = a != b
    return np.stack([a[keep], b[keep]], axis=1)


def stretch_report(g: GeometricGraph, elapsed: float = 0.0, exact_limit: int = 2000,
                   n_samples: int = 100_000, seed: int = 0, mst_w: Optional[float] = None) -> SpannerReport:
    """Verify ``g`` over its original points and summarise it."""
    ids = g.original_ids
    n = len(ids)
    pts = g.coords[ids]
    if mst_w is None:
        mst_w = mst_weight(pts) if n > 1 else 0.0
    if n <= exact_limit:
        pairs = all_original_pairs(g)
        exact = True
    else:
        pairs = sampled_original_pairs(g, n_samples, seed)
        exact = False
    worst, pair, _ = verify_stretch(g, pairs) if len(pairs) else (1.0, None, True)
    tw = g.total_weight()
    return SpannerReport(
        max_stretch=worst,
        total_weight=tw,
        mst_weight=mst_w,
        lightness=tw / mst_w if mst_w > 0 else 1.0,
        n_edges=g.n_edges,
        n_steiner=g.n_steiner,
        elapsed=elapsed,
        n_points=n,
        worst_pair=pair,
        pairs_checked=int(len(pairs)),
        exact=exact,
    )


# -- greedy baseline ---------------------------------------------------

MATRIX_GREEDY_LIMIT = 4000


def greedy_spanner(points, t: float) -> GeometricGraph:
    """Path-greedy t-spanner over all pairs (no Steiner points)."""
    if not t > 1:
        raise GraphError(f"greedy spanner needs t > 1, got {t}")
    arr = as_points(points)
    g = GeometricGraph.from_points(arr)
    n = len(arr)
    if n < 2:
        return g
    iu, ju = np.triu_indices(n, k=1)
    w = pdist(arr)
    order = np.argsort(w, kind="stable")
    cu, cv, cw = iu[order].astype(np.int64), ju[order].astype(np.int64), w[order]
    if n <= MATRIX_GREEDY_LIMIT:
        keep = _kernels.greedy_matrix(n, cu, cv, cw, float(t))
        for a, b in zip(cu[keep].tolist(), cv[keep].tolist()):
            g.add_edge(a, b)
        return g
    return _apply_greedy(g, cu, cv, cw, t)


def greedy_on_candidates(points, cand_u, cand_v, t: float) -> GeometricGraph:
    """Path-greedy filter restricted to a candidate edge set."""
    arr = as_points(points)
    cu = np.asarray(cand_u, dtype=np.int64)
    cv = np.asarray(cand_v, dtype=np.int64)
    w = np.sqrt(((arr[cu] - arr[cv]) ** 2).sum(1))
    order = np.argsort(w, kind="stable")
    return _apply_greedy(GeometricGraph.from_points(arr), cu[order], cv[order], w[order], t)


def _apply_greedy(g: GeometricGraph, cu, cv, cw, t: float) -> GeometricGraph:
    e = np.empty(0, np.int64)
    keep = _kernels.greedy_filter(g.n_vertices, cu.astype(np.int64), cv.astype(np.int64),
                                  cw.astype(float), float(t), e, e, np.empty(0))
    for a, b in zip(cu[keep].tolist(), cv[keep].tolist()):
        g.add_edge(a, b)
    return g
