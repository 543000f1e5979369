"""Steiner (1+eps)-spanner in the plane with lightness O(log(spread)/eps).

Pairs are bucketed by distance scale. For each scale L, a sqrt(eps)*L net
is built on the class endpoints, the plane is tiled by overlapping 9L
squares, and every pair is routed through a Steiner point on the bisector
between the bands holding its two net points. Single-source spanners (or
plain stars, whichever is lighter) connect each bisector point to the
cluster around each net point it serves.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .geometry import GeometryError, as_points, min_max_pairwise
from .graph import GeometricGraph, SpannerReport, bounded_pair_distances, mst_weight, stretch_report
from .nets import NetAssignment, greedy_net
from .steiner_trees import SssInstance, SteinerTreeError, build_sss_scaled

log = logging.getLogger(__name__)

C_CAL = 8
SQUARE_CORE = 5.0
SQUARE_PAD = 2.0
BANDS = 72
BAND_WIDTH = 1.0 / 8.0
SSS_NEAR = 4.0
SSS_MIN_GROUP = 6


@dataclass
class PairClass:
    level: int
    i: np.ndarray
    j: np.ndarray

    @property
    def scale(self) -> float:
        return 2.0 ** self.level

    def __len__(self) -> int:
        return len(self.i)


def pair_level(d) -> np.ndarray:
    """Class index i with d in [2^(i-1), 2^i) for d >= 1 (frexp keeps it exact)."""
    _, e = np.frexp(np.asarray(d, dtype=float))
    return np.maximum(e, 1).astype(np.int64)


def normalize(points) -> Tuple[np.ndarray, np.ndarray, float]:
    """Translate to the bounding-box corner and scale so the minimum distance is 1."""
    arr = as_points(points)
    lo, _ = min_max_pairwise(arr)
    if lo == 0:
        raise GeometryError("duplicate points")
    origin = arr.min(axis=0)
    scale = 1.0 / lo
    return (arr - origin) * scale, origin, scale


def partition_pairs(pts: np.ndarray, i=None, j=None) -> List[PairClass]:
    """Bucket pairs by distance scale; the top class is closed on the right.

    With normalised points (minimum distance 1) the number of classes is
    ceil(log2(spread)), at least 1.
    """
    if i is None:
        i, j = np.triu_indices(len(pts), k=1)
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    d = np.sqrt(((pts[i] - pts[j]) ** 2).sum(1))
    if len(d) == 0:
        return []
    top = max(1, int(math.ceil(math.log2(d.max()))) if d.max() > 1 else 1)
    lev = np.minimum(pair_level(d), top)
    order = np.lexsort((d, lev))
    lev, i, j = lev[order], i[order], j[order]
    out = []
    for k in range(1, top + 1):
        sel = lev == k
        out.append(PairClass(k, i[sel], j[sel]))
    return out


def normalize_and_partition(points) -> List[PairClass]:
    pts, _, _ = normalize(points)
    return partition_pairs(pts)


def prefilter_light_pairs(pts: np.ndarray, classes: List[PairClass], mst_w: Optional[float] = None):
    """Split off every pair no longer than w(MST)/n^2; those become direct edges.

    Returns ``(seed_pairs, reduced_classes)``.
    """
    n = len(pts)
    if mst_w is None:
        mst_w = mst_weight(pts)
    thr = mst_w / (n * n)
    seeds, reduced = [], []
    for pc in classes:
        d = np.sqrt(((pts[pc.i] - pts[pc.j]) ** 2).sum(1))
        light = d <= thr
        if light.any():
            seeds.append(np.stack([pc.i[light], pc.j[light]], 1))
        reduced.append(PairClass(pc.level, pc.i[~light], pc.j[~light]))
    seed = np.concatenate(seeds) if seeds else np.empty((0, 2), np.int64)
    return seed, reduced


# -- subsquares and bands ----------------------------------------------------

def square_key(p, L: float) -> Tuple[int, int]:
    """Core cell (side 5L) containing ``p``; normalised coordinates have origin 0."""
    k = np.floor(np.asarray(p, dtype=float) / (SQUARE_CORE * L)).astype(np.int64)
    return int(k[0]), int(k[1])


def square_low(key, L: float) -> np.ndarray:
    return np.asarray(key, dtype=float) * SQUARE_CORE * L - SQUARE_PAD * L


def squares_containing(p, L: float) -> List[Tuple[int, int]]:
    """Every extended (9L) square that contains ``p``."""
    p = np.asarray(p, dtype=float)
    side = (SQUARE_CORE + 2 * SQUARE_PAD) * L
    base = square_key(p, L)
    out = []
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            key = (base[0] + dx, base[1] + dy)
            lo = square_low(key, L)
            if np.all(p >= lo) and np.all(p < lo + side):
                out.append(key)
    return out


def bisector_points(L: float, eps: float) -> np.ndarray:
    """Offsets of the Steiner points along a bisector of a 9L square."""
    side = (SQUARE_CORE + 2 * SQUARE_PAD) * L
    s = math.sqrt(eps) * L
    k = int(math.floor(side / s + 1e-12))
    pos = np.arange(k + 1) * s
    if side - pos[-1] > 1e-12 * side:
        pos = np.append(pos, side)
    return pos


@dataclass
class LevelStats:
    level: int
    n_pairs: int = 0
    n_skipped: int = 0
    n_routed: int = 0
    net_size: int = 0
    n_squares: int = 0
    n_combos: int = 0
    n_sss: int = 0
    n_star: int = 0
    adjacent_bands: int = 0
    same_net: int = 0
    repairs: int = 0
    weight_added: float = 0.0
    n_endpoints: int = 0


class LevelBuilder:
    """Routes one distance class through bisector Steiner points into a shared graph.

    ``graph`` holds vertices keyed ``("p", i)`` for input points (already in
    normalised coordinates). ``target`` is the stretch a pair must reach;
    pairs already within it are skipped.
    """

    def __init__(self, pts: np.ndarray, graph: GeometricGraph, eps_int: float, target: float,
                 net_fn=greedy_net, chunks: int = 8):
        self.pts = pts
        self.g = graph
        self.eps = eps_int
        self.target = target
        self.net_fn = net_fn
        self.chunks = chunks
        self.memo: Dict[tuple, bool] = {}

    def vid(self, i: int) -> int:
        return self.g.keys[("p", int(i))]

    def _check(self, I, J, d) -> np.ndarray:
        lim = self.target * d
        got = bounded_pair_distances(self.g, [self.vid(a) for a in I], [self.vid(b) for b in J], lim)
        return got <= lim

    def build(self, pc: PairClass) -> LevelStats:
        st = LevelStats(pc.level, n_pairs=len(pc))
        if len(pc) == 0:
            return st
        L = pc.scale
        w0 = self.g.total_weight()
        pts = self.pts
        I, J = pc.i, pc.j
        d = np.sqrt(((pts[I] - pts[J]) ** 2).sum(1))
        ends = np.unique(np.concatenate([I, J]))
        st.n_endpoints = len(ends)
        rho = math.sqrt(self.eps) * L
        net = self.net_fn(pts, rho, subset=ends)
        st.net_size = len(net.net)
        groups = net.groups()
        squares = set()
        n_chunks = max(1, min(self.chunks, len(I) // 64 or 1))
        for part in np.array_split(np.arange(len(I)), n_chunks):
            if len(part) == 0:
                continue
            ok = self._check(I[part], J[part], d[part])
            st.n_skipped += int(ok.sum())
            todo = part[~ok]
            if len(todo) == 0:
                continue
            st.n_routed += len(todo)
            self._route(I[todo], J[todo], L, net, groups, st, squares)
            ok2 = self._check(I[todo], J[todo], d[todo])
            for a, b in zip(I[todo][~ok2].tolist(), J[todo][~ok2].tolist()):
                self.g.add_edge(self.vid(a), self.vid(b))
                st.repairs += 1
        st.n_squares = len(squares)
        st.weight_added = self.g.total_weight() - w0
        return st

    def _route(self, I, J, L, net: NetAssignment, groups, st: LevelStats, squares: set) -> None:
        pts = self.pts
        nx, ny = net.cover_of[I], net.cover_of[J]
        same = nx == ny
        for a, b in zip(I[same].tolist(), J[same].tolist()):
            self.g.add_edge(self.vid(a), self.vid(b))
        st.same_net += int(same.sum())
        I, J, nx, ny = I[~same], J[~same], nx[~same], ny[~same]
        if len(I) == 0:
            return
        px, py = pts[nx], pts[ny]
        key = np.floor(px / (SQUARE_CORE * L)).astype(np.int64)
        lo = key * (SQUARE_CORE * L) - SQUARE_PAD * L
        bw = BAND_WIDTH * L
        bx = np.floor((px - lo) / bw).astype(np.int64)
        by = np.floor((py - lo) / bw).astype(np.int64)
        diff = np.abs(bx - by)
        sep = np.abs(px - py)
        axis = np.where((diff[:, 0] > diff[:, 1]) | ((diff[:, 0] == diff[:, 1]) & (sep[:, 0] >= sep[:, 1])), 0, 1)
        rows = np.arange(len(I))
        ba, bb = bx[rows, axis], by[rows, axis]
        st.adjacent_bands += int((np.abs(ba - bb) < 2).sum())
        bsum = ba + bb + 1
        coord = lo[rows, axis] + bw * bsum / 2.0
        other = 1 - axis
        x, y = pts[I], pts[J]
        xa, ya = x[rows, axis], y[rows, axis]
        den = ya - xa
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(den != 0, (coord - xa) / den, 0.5)
        t = np.clip(t, 0.0, 1.0)
        vo = x[rows, other] + t * (y[rows, other] - x[rows, other])
        pos = bisector_points(L, self.eps)
        rel = vo - lo[rows, other]
        k = np.clip(np.searchsorted(pos, rel), 1, len(pos) - 1)
        k = np.where(np.abs(pos[k - 1] - rel) <= np.abs(pos[k] - rel), k - 1, k)
        for s in map(tuple, np.unique(key, axis=0).tolist()):
            squares.add(s)
        combos = {}
        for q in range(len(I)):
            rkey = (L, int(key[q, 0]), int(key[q, 1]), int(axis[q]), int(bsum[q]), int(k[q]))
            if rkey not in combos:
                rc = np.empty(2)
                rc[axis[q]] = coord[q]
                rc[other[q]] = lo[q, other[q]] + pos[k[q]]
                combos[rkey] = (rc, set())
            combos[rkey][1].update((int(nx[q]), int(ny[q])))
        for rkey, (rc, nets) in combos.items():
            rv = self.g.add_vertex(rc, steiner=True, key=("r",) + rkey)
            for p in sorted(nets):
                mk = (rkey, p)
                if mk in self.memo:
                    continue
                self.memo[mk] = True
                st.n_combos += 1
                self._connect(rv, ("r",) + rkey, rc, p, groups[p], L, st)

    def _connect(self, rv: int, rvkey, rc: np.ndarray, p: int, members: List[int], L: float, st: LevelStats) -> None:
        """Cheaper of a star and a single-source spanner from bisector point to the cluster of ``p``."""
        pts = self.pts
        targets = pts[members]
        star_w = float(np.sqrt(((targets - rc) ** 2).sum(1)).sum())
        rho = math.sqrt(self.eps) * L
        gap = float(np.linalg.norm(pts[p] - rc)) - rho
        best = None
        # far from a small cluster the star always wins; skip the build
        if len(members) >= 2 and gap > 0 and (gap <= SSS_NEAR * rho or len(members) >= SSS_MIN_GROUP):
            inst = SssInstance(rc, pts[p], rho, targets, self.eps,
                               target_keys=[("p", int(m)) for m in members], source_key=rvkey)
            try:
                sub = build_sss_scaled(inst)
            except SteinerTreeError:
                sub = None
            if sub is not None and sub.total_weight() < star_w:
                best = sub
        if best is None:
            st.n_star += 1
            for m in members:
                self.g.add_edge(rv, self.vid(m))
            return
        st.n_sss += 1
        self.g.merge(best)


def _rescale(g: GeometricGraph, origin: np.ndarray, scale: float) -> GeometricGraph:
    out = GeometricGraph(g.dim)
    c = g.coords / scale + origin
    for vid in range(g.n_vertices):
        out.add_vertex(c[vid], g.steiner[vid])
    out.keys = dict(g.keys)
    for (a, b) in g.edges:
        out.add_edge(a, b)
    return out


def _original_graph(n: int, pts: np.ndarray) -> GeometricGraph:
    g = GeometricGraph(pts.shape[1])
    for i in range(n):
        g.add_vertex(pts[i], steiner=False, key=("p", i))
    return g


def build_planar_spanner(points, eps: float, c_cal: float = C_CAL, prefilter_logn: bool = False,
                         chunks: int = 8, verify: bool = True) -> Tuple[GeometricGraph, SpannerReport]:
    """Steiner (1+eps)-spanner of a planar point set.

    The construction runs at ``eps / c_cal`` internally; pairs already
    within ``1+eps`` in the graph built so far are skipped, and any routed
    pair that still misses the target gets a direct edge (counted as a
    repair in the report).
    """
    t0 = time.perf_counter()
    arr = as_points(points)
    if arr.shape[1] != 2:
        raise GeometryError(f"planar spanner needs 2-D points, got d={arr.shape[1]}")
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    n = len(arr)
    if n <= 2:
        g = GeometricGraph.from_points(arr)
        if n == 2:
            g.add_edge(0, 1)
        return g, stretch_report(g, time.perf_counter() - t0)
    pts, origin, scale = normalize(arr)
    g = _original_graph(n, pts)
    classes = partition_pairs(pts)
    extra: dict = {"c_cal": c_cal, "eps_int": eps / c_cal}
    mst_w = mst_weight(pts)
    if prefilter_logn:
        seed, classes = prefilter_light_pairs(pts, classes, mst_w)
        for a, b in seed.tolist():
            g.add_edge(a, b)
        extra["prefilter_edges"] = int(len(seed))
    builder = LevelBuilder(pts, g, eps / c_cal, 1 + eps, greedy_net, chunks)
    levels = [builder.build(pc) for pc in classes]
    extra["levels"] = [vars(s) for s in levels]
    extra["repairs"] = sum(s.repairs for s in levels)
    out = _rescale(g, origin, scale)
    elapsed = time.perf_counter() - t0
    if verify:
        rep = stretch_report(out, elapsed, mst_w=mst_w / scale)
    else:
        tw = out.total_weight()
        rep = SpannerReport(math.nan, tw, mst_w / scale, tw * scale / mst_w, out.n_edges, out.n_steiner,
                            elapsed, n_points=n, exact=False)
    rep.extra.update(extra)
    return out, rep
