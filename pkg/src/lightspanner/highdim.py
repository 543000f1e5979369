"""Light Steiner spanners in any dimension via charging cover trees.

Pairs are split by a scale offset ``delta`` (a power of two below 1/eps)
and a level ``i`` with ``w in (L_i/2, L_i]``, ``L_i = delta / eps**i``.
For each offset a cover tree is grown over the input points plus the
Steiner points that subdivide the MST into unit-ish pieces. Level graphs
connect cover points whose descendants hold a pair of the level; low-degree
cover points keep their level-graph edges, high-degree ones are handed to a
pluggable Steiner spanner whose weight is charged to uncharged descendants.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import ConvexHull
from scipy.spatial.distance import cdist, pdist

from .geometry import GeometryError, as_points, min_max_pairwise
from .graph import (GeometricGraph, SpannerReport, _pair_ratios, all_original_pairs, greedy_spanner,
                    mst, sampled_original_pairs, stretch_report, subdivide_mst)

C_TREE = 20
HD_CAL = 4

StpFn = Callable[[np.ndarray, float], GeometricGraph]


class ChargingError(AssertionError):
    """An invariant of the charging cover tree broke; this is a bug, not bad input."""


def internal_eps(eps: float, cal: float = HD_CAL) -> float:
    """Largest power of two not above ``eps / cal``."""
    return 2.0 ** math.floor(math.log2(eps / cal))


def delta_values(eps_int: float) -> List[float]:
    j = int(round(math.log2(1.0 / eps_int)))
    return [2.0 ** k for k in range(j)]


# -- edge classes ---------------------------------------------------------

@dataclass
class EdgeClass:
    delta: float
    level: int
    L: float
    i: np.ndarray
    j: np.ndarray

    def __len__(self) -> int:
        return len(self.i)


def class_of(w, delta: float, eps: float) -> np.ndarray:
    """Level ``i`` with ``w`` in ``(L_i/2, L_i]``, or 0 when ``w`` belongs to another offset."""
    w = np.asarray(w, dtype=float)
    base = 1.0 / eps
    lev = np.ceil(np.log(w / delta) / np.log(base) - 1e-9).astype(np.int64)
    lev = np.maximum(lev, 0)
    L = delta * base ** lev.astype(float)
    lev = np.where(L < w, lev + 1, lev)
    L = delta * base ** lev.astype(float)
    low = delta * base ** (lev - 1).astype(float)
    lev = np.where((low >= w) & (lev > 0), lev - 1, lev)
    L = delta * base ** lev.astype(float)
    return np.where((w > L / 2) & (lev >= 1), lev, 0)


def partition_edge_classes(pts: np.ndarray, eps: float, delta: float, i=None, j=None) -> List[EdgeClass]:
    """Pairs of ``pts`` (rescaled so the minimum distance is at least 1/eps) claimed by ``delta``."""
    if i is None:
        i, j = np.triu_indices(len(pts), k=1)
    i = np.asarray(i, np.int64)
    j = np.asarray(j, np.int64)
    w = np.sqrt(((pts[i] - pts[j]) ** 2).sum(1))
    lev = class_of(w, delta, eps)
    out = []
    for k in np.unique(lev[lev > 0]).tolist():
        sel = lev == k
        out.append(EdgeClass(delta, int(k), delta / eps ** k, i[sel], j[sel]))
    return out


# -- tree splitting ---------------------------------------------------------

def _tree_order(n: int, eu, ev, ew, roots):
    """BFS order and parent pointers of a forest given by edge lists."""
    adj = [[] for _ in range(n)]
    for a, b, w in zip(eu, ev, ew):
        adj[a].append((b, w))
        adj[b].append((a, w))
    parent = np.full(n, -1, dtype=np.int64)
    pw = np.zeros(n)
    seen = np.zeros(n, dtype=bool)
    order = []
    comp = np.full(n, -1, dtype=np.int64)
    for r in roots:
        if seen[r]:
            continue
        seen[r] = True
        q = [r]
        head = 0
        while head < len(q):
            v = q[head]
            head += 1
            comp[v] = r
            for u, w in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    parent[u] = v
                    pw[u] = w
                    q.append(u)
        order.extend(q)
    return order, parent, pw, adj, comp


def _diameter(nodes: List[int], adj, vw, allowed) -> float:
    """Largest path weight (vertex plus edge weights) inside ``nodes``."""
    if not nodes:
        return 0.0

    def far(s):
        best, arg = vw[s], s
        dist = {s: vw[s]}
        stack = [s]
        while stack:
            v = stack.pop()
            for u, w in adj[v]:
                if u in dist or not allowed(u):
                    continue
                dist[u] = dist[v] + w + vw[u]
                if dist[u] > best:
                    best, arg = dist[u], u
                stack.append(u)
        return arg, best

    a, _ = far(nodes[0])
    _, d = far(a)
    return d


def split_tree(n: int, eu, ev, ew, vw, lower: float, roots=None):
    """Cut a forest into subtrees whose path weight is at least ``lower``.

    Path weight counts vertex weights ``vw`` plus edge weights ``ew``.
    A bottom-up pass closes a cluster at ``v`` once the heaviest pending
    path hanging from ``v`` reaches ``lower``; what is left at the top joins
    an adjacent cluster unless it is heavy enough on its own.

    Returns ``(label, small)``: cluster head (local index) per node, and the
    list of component roots whose whole component is lighter than ``lower``.
    """
    vw = np.asarray(vw, dtype=float)
    if roots is None:
        roots = range(n)
    order, parent, pw, adj, comp = _tree_order(n, eu, ev, ew, roots)
    h = vw.copy()
    cut = np.zeros(n, dtype=bool)
    for v in reversed(order):
        if h[v] >= lower:
            cut[v] = True
        p = parent[v]
        if p >= 0 and not cut[v]:
            h[p] = max(h[p], vw[p] + pw[v] + h[v])
    label = np.full(n, -1, dtype=np.int64)
    for v in order:
        p = parent[v]
        label[v] = v if cut[v] or p < 0 else label[p]
    small = []
    by_root: Dict[int, List[int]] = {}
    for v in order:
        if label[v] == comp[v] and not cut[comp[v]]:
            by_root.setdefault(int(comp[v]), []).append(v)
    for r, left in by_root.items():
        members = set(left)
        if _diameter(left, adj, vw, members.__contains__) >= lower:
            continue
        target = -1
        for v in left:
            for u, _ in adj[v]:
                if parent[u] == v and cut[u]:
                    target = u
                    break
            if target >= 0:
                break
        if target < 0:
            small.append(r)
            continue
        for v in left:
            label[v] = target
    return label, small


# -- set diameters ------------------------------------------------------------

def set_diameter(x: np.ndarray) -> float:
    if len(x) < 2:
        return 0.0
    if len(x) > 64:
        try:
            x = x[ConvexHull(x).vertices]
        except Exception:  # flat set; joggled hull still returns original vertices
            try:
                x = x[ConvexHull(x, qhull_options="QJ").vertices]
            except Exception:
                pass
    if len(x) <= 4000:
        return float(pdist(x).max())
    return max(float(cdist(x[k:k + 2000], x).max()) for k in range(0, len(x), 2000))


def group_diameters(pts: np.ndarray, anc: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    order = np.argsort(anc, kind="stable")
    sa = anc[order]
    starts = np.searchsorted(sa, nodes, side="left")
    ends = np.searchsorted(sa, nodes, side="right")
    return np.array([set_diameter(pts[order[s:e]]) for s, e in zip(starts, ends)])


# -- level graph ----------------------------------------------------------------

@dataclass
class LevelGraph:
    level: int
    threshold: float
    u: np.ndarray
    v: np.ndarray
    degree: Dict[int, int]

    @property
    def high(self) -> List[int]:
        return sorted(p for p, d in self.degree.items() if d >= self.threshold)

    def neighbors(self) -> Dict[int, List[int]]:
        nb: Dict[int, List[int]] = {}
        for a, b in zip(self.u.tolist(), self.v.tolist()):
            nb.setdefault(a, []).append(b)
            nb.setdefault(b, []).append(a)
        return nb


def build_level_graph(anc: np.ndarray, nodes, level: int, pairs_i, pairs_j, threshold: float) -> LevelGraph:
    """Edge between cover points whenever some class pair joins their descendants."""
    a = anc[np.asarray(pairs_i, np.int64)]
    b = anc[np.asarray(pairs_j, np.int64)]
    keep = a != b
    e = np.sort(np.stack([a[keep], b[keep]], 1), axis=1)
    e = np.unique(e, axis=0) if len(e) else np.empty((0, 2), np.int64)
    deg = {int(p): 0 for p in np.asarray(nodes).tolist()}
    if len(e):
        ids, cnt = np.unique(e.ravel(), return_counts=True)
        for p, c in zip(ids.tolist(), cnt.tolist()):
            deg[p] = c
    return LevelGraph(level, threshold, e[:, 0], e[:, 1], deg)


# -- charging cover tree ------------------------------------------------------------

@dataclass
class CoverLevel:
    index: int
    L: float
    anc: np.ndarray
    nodes: np.ndarray
    diam: np.ndarray
    n_desc: np.ndarray
    uncharged: np.ndarray
    step: Dict[int, str] = field(default_factory=dict)
    graph: Optional[LevelGraph] = None
    charged: Dict[int, np.ndarray] = field(default_factory=dict)
    stp: Optional[GeometricGraph] = None
    degenerate: bool = False


@dataclass
class ChargingCoverTree:
    pts: np.ndarray
    n_original: int
    mst_u: np.ndarray
    mst_v: np.ndarray
    mst_w: np.ndarray
    eps: float
    delta: float
    c: float
    threshold: float
    levels: List[CoverLevel] = field(default_factory=list)
    charged_at: np.ndarray = None
    charge: np.ndarray = None

    def et_edges(self) -> np.ndarray:
        """Child-parent point pairs over all levels (distinct points only)."""
        out = []
        prev = np.arange(len(self.pts))
        for lv in self.levels:
            par = lv.anc[prev]
            keep = par != prev
            out.append(np.stack([prev[keep], par[keep]], 1))
            prev = lv.nodes
        e = np.concatenate(out) if out else np.empty((0, 2), np.int64)
        return np.unique(np.sort(e, axis=1), axis=0)

    def descendants(self, level: int, p: int) -> np.ndarray:
        return np.flatnonzero(self.levels[level - 1].anc == p)


def _level_stats(tree: ChargingCoverTree, anc: np.ndarray):
    nodes = np.unique(anc)
    diam = group_diameters(tree.pts, anc, nodes)
    n_desc = np.bincount(anc, minlength=len(tree.pts))[nodes]
    un = np.bincount(anc[tree.charged_at < 0], minlength=len(tree.pts))[nodes]
    return nodes, diam, n_desc, un


def _charge_level(tree: ChargingCoverTree, lv: CoverLevel, stp: StpFn) -> None:
    high = lv.graph.high
    if not high:
        return
    q = np.asarray(high, np.int64)
    lv.stp = stp(tree.pts[q], tree.eps)
    w = lv.stp.total_weight()
    need = int(math.ceil(tree.eps * lv.L / 2))
    xs = []
    for p in high:
        desc = np.flatnonzero((lv.anc == p) & (tree.charged_at < 0))
        if len(desc) < need:
            raise ChargingError(f"level {lv.index}: node {p} has {len(desc)} uncharged descendants, needs {need}")
        lv.charged[p] = desc[:need]
        xs.append(desc[:need])
    x = np.concatenate(xs)
    tree.charged_at[x] = lv.index
    tree.charge[x] += w / len(x)


def _next_level(tree: ChargingCoverTree, lv: CoverLevel) -> Tuple[np.ndarray, Dict[int, str], bool]:
    """Steps A, B and C: parent (level i+1 point) for every level-i node."""
    nodes = lv.nodes.tolist()
    parent: Dict[int, int] = {}
    step: Dict[int, str] = {}
    nb = lv.graph.neighbors()
    thr = tree.threshold
    marked = set()
    high = lv.graph.high
    for p in high:
        if p in marked:
            continue
        free = [q for q in nb.get(p, []) if q not in marked]
        if len(free) < thr:
            continue
        parent[p] = p
        step[p] = "A"
        for q in free:
            parent[q] = p
        marked.add(p)
        marked.update(nb.get(p, []))
    for x in high:
        if x in parent:
            continue
        q = next(q for q in nb.get(x, []) if q in marked)
        parent[x] = parent[q]
    stepA = bool(parent)
    rest = [p for p in nodes if p not in parent]
    idx = {p: k for k, p in enumerate(rest)}
    a = lv.anc[tree.mst_u]
    b = lv.anc[tree.mst_v]
    cross = a != b
    fu, fv, fw = [], [], []
    lab = np.arange(len(rest))

    def find(x):
        while lab[x] != x:
            lab[x] = lab[lab[x]]
            x = lab[x]
        return x

    order = np.argsort(tree.mst_w[cross], kind="stable")
    ca, cb, cw = a[cross][order], b[cross][order], tree.mst_w[cross][order]
    for x, y, w in zip(ca.tolist(), cb.tolist(), cw.tolist()):
        if x in idx and y in idx:
            rx, ry = find(idx[x]), find(idx[y])
            if rx != ry:
                lab[rx] = ry
                fu.append(idx[x])
                fv.append(idx[y])
                fw.append(0.0)
    diam = dict(zip(lv.nodes.tolist(), lv.diam.tolist()))
    vw = np.array([diam[p] for p in rest])
    label, small = split_tree(len(rest), fu, fv, fw, vw, lv.L)
    degenerate = False
    small_roots = set(small)
    _, _, _, _, comp = _tree_order(len(rest), fu, fv, fw, range(len(rest)))
    # Step B: each cluster is headed by its lowest point id
    heads: Dict[int, int] = {}
    for k, p in enumerate(rest):
        if comp[k] not in small_roots:
            h = int(label[k])
            heads[h] = min(heads.get(h, p), p)
    for k, p in enumerate(rest):
        if comp[k] not in small_roots:
            parent[p] = heads[int(label[k])]
            step[p] = "B"
    # Step C
    for r in small:
        members = [rest[k] for k in np.flatnonzero(comp == r).tolist()]
        mset = set(members)
        target = None
        if stepA:
            for x, y in zip(ca.tolist(), cb.tolist()):
                if x in mset and y in parent and y not in idx:
                    target = parent[y]
                    break
                if y in mset and x in parent and x not in idx:
                    target = parent[x]
                    break
        if target is None:
            if stepA or len(small) > 1 or any(comp[k] not in small_roots for k in range(len(rest))):
                raise ChargingError(f"level {lv.index}: light component without an anchor")
            target = min(members)
            degenerate = True
        for p in members:
            parent[p] = target
            step[p] = "C" if not degenerate else "root"
    return parent, step, degenerate


def build_charging_cover_tree(pts: np.ndarray, n_original: int, mst_u, mst_v, eps: float, delta: float,
                              classes: Dict[int, Tuple[np.ndarray, np.ndarray]], n_levels: int,
                              c: float = C_TREE, degree_threshold: Optional[float] = None,
                              stp: Optional[StpFn] = None) -> ChargingCoverTree:
    """Grow the tree level by level, charging high-degree nodes as it goes.

    ``pts`` holds the input points (first ``n_original`` rows) and the MST
    subdivision points; MST pieces must have length in (1/2, 1].
    ``classes`` maps level to the pair arrays of that level.
    """
    pts = np.asarray(pts, dtype=float)
    M = len(pts)
    mu = np.asarray(mst_u, np.int64)
    mv = np.asarray(mst_v, np.int64)
    mw = np.sqrt(((pts[mu] - pts[mv]) ** 2).sum(1)) if len(mu) else np.empty(0)
    thr = degree_threshold if degree_threshold is not None else 4 * c / eps
    tree = ChargingCoverTree(pts, n_original, mu, mv, mw, eps, delta, c, thr,
                             charged_at=np.full(M, -1, np.int64), charge=np.zeros(M))
    stp = stp or default_stp
    label, small = split_tree(M, mu.tolist(), mv.tolist(), mw.tolist(), np.zeros(M), delta, roots=[0])
    heads: Dict[int, int] = {}
    for x, h in enumerate(label.tolist()):
        heads[h] = min(heads.get(h, x), x)
    anc = np.array([heads[h] for h in label.tolist()], dtype=np.int64) if M else np.empty(0, np.int64)
    degenerate = bool(small)
    step0 = "root" if degenerate else "1"
    pending_step: Dict[int, str] = {}
    for i in range(1, n_levels + 1):
        nodes, diam, n_desc, un = _level_stats(tree, anc)
        L = delta / eps ** i
        lv = CoverLevel(i, L, anc, nodes, diam, n_desc, un, degenerate=degenerate)
        if i == 1:
            lv.step = {int(p): step0 for p in nodes.tolist()}
        else:
            lv.step = {int(p): s for p, s in pending_step.items() if p in set(nodes.tolist())}
        ci, cj = classes.get(i, (np.empty(0, np.int64), np.empty(0, np.int64)))
        lv.graph = build_level_graph(anc, nodes, i, ci, cj, thr)
        tree.levels.append(lv)
        _charge_level(tree, lv, stp)
        if i == n_levels:
            break
        parent, pending, degenerate = _next_level(tree, lv)
        pending_step = {parent[p]: pending.get(parent[p], "A") for p in parent}
        lookup = np.zeros(M, np.int64)
        keys = np.fromiter(parent.keys(), np.int64, len(parent))
        lookup[keys] = np.fromiter(parent.values(), np.int64, len(parent))
        anc = lookup[anc]
    return tree


# -- validators ---------------------------------------------------------------------

def check_cover(tree: ChargingCoverTree) -> None:
    """Every level-i node's descendants lie within c*eps*L_i of it, diameter included; levels nest."""
    prev = None
    for lv in tree.levels:
        bound = tree.c * tree.eps * lv.L
        r = np.sqrt(((tree.pts - tree.pts[lv.anc]) ** 2).sum(1))
        if r.max(initial=0) > bound * (1 + 1e-9):
            raise ChargingError(f"level {lv.index}: cover radius {r.max():.4g} > {bound:.4g}")
        for p, dm in zip(lv.nodes.tolist(), group_diameters(tree.pts, lv.anc, lv.nodes).tolist()):
            if dm > bound * (1 + 1e-9):
                raise ChargingError(f"level {lv.index}: node {p} diameter {dm:.4g} > {bound:.4g}")
        if not np.all(lv.anc[lv.nodes] == lv.nodes):
            raise ChargingError(f"level {lv.index}: a cover point is not its own ancestor")
        if prev is not None:
            if not np.isin(lv.nodes, prev.nodes).all():
                raise ChargingError(f"level {lv.index} is not nested in level {prev.index}")
            if not np.all(lv.anc == lv.anc[prev.anc]):
                raise ChargingError(f"level {lv.index}: ancestry is inconsistent")
        prev = lv


def check_sci(tree: ChargingCoverTree) -> None:
    """Uncharged descendants before each level's charging cover max(eps*L_i, D+1)."""
    for lv in tree.levels:
        if lv.degenerate:
            continue
        free = (tree.charged_at < 0) | (tree.charged_at >= lv.index)
        cnt = np.bincount(lv.anc[free], minlength=len(tree.pts))
        diam = group_diameters(tree.pts, lv.anc, lv.nodes)
        for p, dm in zip(lv.nodes.tolist(), diam.tolist()):
            need = max(tree.eps * lv.L, dm + 1)
            if cnt[p] < need - 1e-9:
                raise ChargingError(f"level {lv.index}: node {p} has {cnt[p]} uncharged descendants < {need:.4g}")


def check_charging(tree: ChargingCoverTree) -> None:
    """Each point charged at most once, only under high-degree nodes, exactly ceil(eps*L_i/2) per node."""
    seen = np.zeros(len(tree.pts), dtype=bool)
    for lv in tree.levels:
        need = int(math.ceil(tree.eps * lv.L / 2))
        high = set(lv.graph.high)
        if set(lv.charged) != high:
            raise ChargingError(f"level {lv.index}: charged nodes differ from high-degree nodes")
        for p, xs in lv.charged.items():
            if len(xs) != need or len(set(xs.tolist())) != need:
                raise ChargingError(f"level {lv.index}: node {p} charged {len(xs)} points, expected {need}")
            if np.any(lv.anc[xs] != p):
                raise ChargingError(f"level {lv.index}: node {p} charged a non-descendant")
            if seen[xs].any():
                raise ChargingError(f"level {lv.index}: a point was charged twice")
            if np.any(tree.charged_at[xs] != lv.index):
                raise ChargingError(f"level {lv.index}: charge ledger mismatch")
            seen[xs] = True
    if np.any(seen != (tree.charged_at >= 0)):
        raise ChargingError("charge ledger has points outside the per-level lists")


def et_graph(tree: ChargingCoverTree) -> csr_matrix:
    e = tree.et_edges()
    n = len(tree.pts)
    if len(e) == 0:
        return csr_matrix((n, n))
    w = np.sqrt(((tree.pts[e[:, 0]] - tree.pts[e[:, 1]]) ** 2).sum(1))
    return csr_matrix((np.r_[w, w], (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])), shape=(n, n))


def check_et_diameter(tree: ChargingCoverTree, n_pairs: int = 10_000, seed: int = 0) -> float:
    """Sample descendant pairs and check their tree-edge distance is at most 4*c*eps*L_i.

    Returns the worst observed ratio to the bound.
    """
    rng = np.random.default_rng(seed)
    g = et_graph(tree)
    per = 100
    worst = 0.0
    levels = [lv for lv in tree.levels if not lv.degenerate] or tree.levels
    n_src = max(1, n_pairs // per)
    for _ in range(n_src):
        lv = levels[rng.integers(len(levels))]
        p = lv.nodes[rng.integers(len(lv.nodes))]
        desc = np.flatnonzero(lv.anc == p)
        if len(desc) < 2:
            continue
        x = int(rng.choice(desc))
        ys = rng.choice(desc, size=per)
        bound = 4 * tree.c * tree.eps * lv.L
        d = dijkstra(g, indices=x, limit=bound * (1 + 1e-9))
        r = d[ys] / bound
        worst = max(worst, float(r.max()))
        if r.max() > 1 + 1e-9:
            raise ChargingError(f"level {lv.index}: descendants {x},{ys[np.argmax(r)]} too far apart in E_T")
    return worst


# -- spanner -------------------------------------------------------------------------

def default_stp(q: np.ndarray, eps: float) -> GeometricGraph:
    """Non-Steiner greedy (1+eps)-spanner; denser than an optimal Steiner construction."""
    if len(q) < 2:
        return GeometricGraph.from_points(q) if len(q) else GeometricGraph(q.shape[1] if q.ndim == 2 else 1)
    return greedy_spanner(q, 1 + eps)


def complete_stp(q: np.ndarray, eps: float) -> GeometricGraph:
    g = GeometricGraph.from_points(q)
    for a in range(len(q)):
        for b in range(a + 1, len(q)):
            g.add_edge(a, b)
    return g


STP_PLUGINS = {"greedy": default_stp, "complete": complete_stp}


def blackbox_stp(q, eps: float, plugin: str | StpFn = "greedy") -> GeometricGraph:
    fn = STP_PLUGINS[plugin] if isinstance(plugin, str) else plugin
    return fn(np.asarray(q, dtype=float), eps)


def _subdivided(pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """MST cut into unit-or-shorter pieces; returns coords (inputs first) and piece endpoints."""
    sub, _ = subdivide_mst(mst(pts))
    u, v, _ = sub.edge_arrays()
    return sub.coords, u, v


def build_highdim_spanner(points, eps: float, eps_int: Optional[float] = None, c: float = C_TREE,
                          degree_threshold: Optional[float] = None, stp: str | StpFn = "greedy",
                          prefilter_logn: bool = False, verify: bool = True, seed: int = 0,
                          keep_trees: bool = False) -> Tuple[GeometricGraph, SpannerReport]:
    """Steiner (1+eps)-spanner in R^d from one charging cover tree per scale offset.

    Pairs that still miss 1+eps after construction get a direct edge; the
    count is reported as ``repairs``.
    """
    t0 = time.perf_counter()
    arr = as_points(points)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    n, d = arr.shape
    if n <= 2:
        g = GeometricGraph.from_points(arr)
        if n == 2:
            g.add_edge(0, 1)
        return g, stretch_report(g, time.perf_counter() - t0)
    e = eps_int if eps_int is not None else internal_eps(eps)
    stp_fn = STP_PLUGINS[stp] if isinstance(stp, str) else stp
    lo, hi = min_max_pairwise(arr)
    if lo == 0:
        raise GeometryError("duplicate points")
    scale = (1.0 / e) / lo
    origin = arr.min(axis=0)
    pts = (arr - origin) * scale
    allpts, mu, mv = _subdivided(pts)
    M = len(allpts)
    g = GeometricGraph(d)
    for k in range(M):
        g.add_vertex(allpts[k], steiner=k >= n, key=("p", k) if k < n else ("k", k))
    for a, b in zip(mu.tolist(), mv.tolist()):
        g.add_edge(a, b)
    mst_w = sum(g.edges.values())
    pi, pj = np.triu_indices(n, k=1)
    extra: dict = {"eps_int": e, "c": c, "n_subdivision": M - n}
    if prefilter_logn:
        w = np.sqrt(((pts[pi] - pts[pj]) ** 2).sum(1))
        light = w <= mst_w / (n * n)
        for a, b in zip(pi[light].tolist(), pj[light].tolist()):
            g.add_edge(a, b)
        pi, pj = pi[~light], pj[~light]
        extra["prefilter_edges"] = int(light.sum())
    n_levels_of = {}
    runs = []
    trees = []
    max_w = hi * scale
    for delta in delta_values(e):
        classes = partition_edge_classes(pts, e, delta, pi, pj)
        m = max(1, int(math.ceil(math.log(max_w / delta) / math.log(1 / e) - 1e-9)))
        n_levels_of[delta] = m
        tree = build_charging_cover_tree(allpts, n, mu, mv, e, delta,
                                         {c_.level: (c_.i, c_.j) for c_ in classes}, m, c,
                                         degree_threshold, stp_fn)
        et = tree.et_edges()
        for a, b in et.tolist():
            g.add_edge(a, b)
        w_et = float(np.sqrt(((allpts[et[:, 0]] - allpts[et[:, 1]]) ** 2).sum(1)).sum()) if len(et) else 0.0
        n_step1 = n_high = 0
        for lv in tree.levels:
            high = set(lv.graph.high)
            n_high += len(high)
            for a, b in zip(lv.graph.u.tolist(), lv.graph.v.tolist()):
                if a not in high or b not in high:
                    g.add_edge(a, b)
                    n_step1 += 1
            if lv.stp is not None:
                q = np.asarray(lv.graph.high, np.int64)
                sub = lv.stp
                remap = {}
                for vid in range(sub.n_vertices):
                    remap[vid] = int(q[vid]) if vid < len(q) else g.add_vertex(sub.coord(vid), steiner=True)
                for (a, b) in sub.edges:
                    g.add_edge(remap[a], remap[b])
        runs.append({"delta": delta, "levels": m, "classes": {c_.level: len(c_) for c_ in classes},
                     "nodes": [len(lv.nodes) for lv in tree.levels], "step1_edges": n_step1,
                     "high_nodes": n_high, "et_weight": w_et, "max_charge": float(tree.charge.max(initial=0))})
        if keep_trees:
            trees.append(tree)
    orig = all_original_pairs(g) if n <= 2000 else sampled_original_pairs(g, 100_000, seed)
    ratios = _pair_ratios(g, orig) if len(orig) else np.empty(0)
    bad = orig[ratios > 1 + eps]
    for a, b in bad.tolist():
        g.add_edge(a, b)
    extra["repairs"] = int(len(bad))
    extra["runs"] = runs
    extra["mst_subdivided_weight"] = mst_w
    extra["max_charge"] = max((r["max_charge"] for r in runs), default=0.0)
    out = GeometricGraph(d)
    c_out = g.coords / scale + origin
    for k in range(g.n_vertices):
        out.add_vertex(c_out[k], g.steiner[k])
    out.keys = dict(g.keys)
    for (a, b) in g.edges:
        out.add_edge(a, b)
    elapsed = time.perf_counter() - t0
    mw_orig = mst_w / scale
    if verify:
        rep = stretch_report(out, elapsed, seed=seed, mst_w=mw_orig)
    else:
        tw = out.total_weight()
        rep = SpannerReport(math.nan, tw, mw_orig, tw / mw_orig, out.n_edges, out.n_steiner, elapsed,
                            n_points=n, exact=False)
    rep.extra.update(extra)
    if keep_trees:
        rep.extra["trees"] = trees
    return out, rep
