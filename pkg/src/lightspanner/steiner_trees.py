"""Shallow-light Steiner trees and single-source spanners in the plane.

All constructions are scale-free: a source ``p`` at distance ``D`` from a
target region of radius ``sqrt(eps) * D`` is handled exactly like the unit
case after rescaling by ``D``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable, List, Optional, Sequence

import numpy as np

from .graph import GeometricGraph

_RATIO = 2.0 ** -1.5  # vertical extent shrink per branching level
_KAPPAS = np.linspace(0.05, 0.64, 60)
_DETOUR_BUDGET = 0.95  # fraction of eps*D the tree may spend on detours
C_SLT = 12.0
C_SSS = 40.0


class SteinerTreeError(ValueError):
    pass


def _check_eps(eps: float) -> None:
    if not 0 < eps <= 0.25:
        raise SteinerTreeError(f"eps must lie in (0, 1/4], got {eps}")


@dataclass
class SltInstance:
    source: np.ndarray
    seg_a: np.ndarray
    seg_b: np.ndarray
    targets: np.ndarray
    eps: float
    target_keys: Optional[Sequence[Hashable]] = None
    source_key: Hashable = "source"

    def __post_init__(self):
        self.source = np.asarray(self.source, dtype=float)
        self.seg_a = np.asarray(self.seg_a, dtype=float)
        self.seg_b = np.asarray(self.seg_b, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float).reshape(-1, 2)
        if self.target_keys is None:
            self.target_keys = [("t", k) for k in range(len(self.targets))]


@dataclass
class SssInstance:
    source: np.ndarray
    center: np.ndarray
    radius: float
    targets: np.ndarray
    eps: float
    host_quality: float = 1.0
    target_keys: Optional[Sequence[Hashable]] = None
    source_key: Hashable = "source"

    def __post_init__(self):
        self.source = np.asarray(self.source, dtype=float)
        self.center = np.asarray(self.center, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float).reshape(-1, 2)
        if self.target_keys is None:
            self.target_keys = [("t", k) for k in range(len(self.targets))]

    @property
    def gap(self) -> float:
        """Distance from the source to the disc."""
        return float(np.linalg.norm(self.center - self.source)) - self.radius


# -- shallow-light tree ---------------------------------------------------

def _slt_detour(kappa, D, ell, J, trunk_offset):
    h0 = kappa * D / (1 - _RATIO)
    if h0 >= D:
        return math.inf
    total = trunk_offset ** 2 / (2 * (D - h0))
    for j in range(J):
        a = ell * 2.0 ** -j / 4
        total += a * a / (2 * kappa * D * _RATIO ** j)
    a = ell * 2.0 ** -J / 2
    total += a * a / (2 * h0 * _RATIO ** J)
    return total


def _slt_into(g: GeometricGraph, src: int, p, a, b, tvids: List[int], tpts: np.ndarray, eps: float) -> None:
    """Add a shallow-light tree from vertex ``src`` at ``p`` to targets on segment ``ab``."""
    if len(tvids) == 0:
        return
    ell = float(np.linalg.norm(b - a))
    e = (b - a) / ell if ell > 0 else np.array([1.0, 0.0])
    foot = a + np.dot(p - a, e) * e
    D = float(np.linalg.norm(p - foot))
    if D <= 0:
        raise SteinerTreeError("source lies on the segment line")
    u = (foot - p) / D
    s_t = (tpts - foot) @ e
    s_a, s_b = float(np.dot(a - foot, e)), float(np.dot(b - foot, e))
    lo, hi = min(s_a, s_b), max(s_a, s_b)
    center = 0.5 * (lo + hi)
    J = max(1, math.ceil(0.5 * math.log2(1.0 / eps)))
    budget = _DETOUR_BUDGET * eps * D
    kappa = next((k for k in _KAPPAS if _slt_detour(k, D, ell, J, abs(center)) <= budget), None)
    if kappa is None:
        raise SteinerTreeError(
            f"segment of length {ell:.4g} too long for a (1+eps)-SLT at distance {D:.4g} (eps={eps})")
    h = [kappa * D * _RATIO ** j / (1 - _RATIO) for j in range(J + 1)]

    def at(s, height):
        return foot + s * e - height * u

    tol = 1e-12 * max(ell, D)
    on_axis = np.abs(s_t) <= tol
    root = g.add_vertex(at(center, h[0]))
    g.add_edge(src, root)
    if on_axis.any():
        hub = root if abs(center) <= tol else src
        for k in np.flatnonzero(on_axis):
            g.add_edge(hub, tvids[k])

    stack = [(root, lo, hi, 0, np.flatnonzero(~on_axis))]
    while stack:
        vid, l, r, j, idx = stack.pop()
        if len(idx) == 0:
            continue
        if j == J:
            for k in idx:
                g.add_edge(vid, tvids[k])
            continue
        mid = 0.5 * (l + r)
        left = idx[s_t[idx] < mid]
        right = idx[s_t[idx] >= mid]
        for cl, cr, sub in ((l, mid, left), (mid, r, right)):
            if len(sub):
                child = g.add_vertex(at(0.5 * (cl + cr), h[j + 1]))
                g.add_edge(vid, child)
                stack.append((child, cl, cr, j + 1, sub))


def build_slt(inst: SltInstance) -> GeometricGraph:
    """Steiner tree from the source to points on a short segment with root stretch <= 1+eps.

    The tree is a pruned balanced binary splitting tree: a trunk drops from
    the source toward the segment, and at branching level j each node splits
    its interval in two while descending a vertical extent proportional to
    2^(-3j/2). The detour budget picks the smallest vertical scale that keeps
    the summed detour under ``eps * D``.
    """
    _check_eps(inst.eps)
    p, a, b = inst.source, inst.seg_a, inst.seg_b
    ell = float(np.linalg.norm(b - a))
    scale = max(ell, float(np.linalg.norm(p - a)), 1e-300)
    for k, x in enumerate(inst.targets):
        t = np.clip(np.dot(x - a, b - a) / max(ell * ell, 1e-300), 0.0, 1.0)
        if np.linalg.norm(a + t * (b - a) - x) > 1e-9 * scale:
            raise SteinerTreeError(f"target {k} does not lie on the segment")
    g = GeometricGraph(2)
    src = g.add_vertex(p, steiner=False, key=inst.source_key)
    tv = [g.add_vertex(x, steiner=False, key=k) for x, k in zip(inst.targets, inst.target_keys)]
    _slt_into(g, src, p, a, b, tv, inst.targets, inst.eps)
    return g


# -- single-source spanners ---------------------------------------------

def _frame(p, c):
    d = c - p
    n = float(np.linalg.norm(d))
    if n == 0:
        raise SteinerTreeError("source coincides with the disc center")
    u = d / n
    w = np.array([-u[1], u[0]])
    return u, w


def _sss_unit_into(g: GeometricGraph, src: int, inst: SssInstance, tvids: List[int]) -> dict:
    eps = inst.eps
    p, c, rho = inst.source, inst.center, float(inst.radius)
    unit = rho / math.sqrt(eps)
    gap = inst.gap
    if gap < unit * (1 - 1e-9):
        raise SteinerTreeError(f"source is {gap:.4g} from the disc, closer than the unit {unit:.4g}")
    info = {"grid_weight": 0.0, "corners": [], "full_grid_weight": 0.0, "slt_vertices": 0}
    if len(tvids) == 0:
        return info
    u, w = _frame(p, c)
    rel = inst.targets - c
    la, lb = rel @ w, rel @ u
    cell = eps * unit
    k = max(1, math.ceil(2 * rho / cell - 1e-9))
    ia = np.clip(np.floor((la + rho) / cell).astype(np.int64), 0, k - 1)
    ib = np.clip(np.floor((lb + rho) / cell).astype(np.int64), 0, k - 1)
    info["full_grid_weight"] = 2 * (k + 1) * (k * cell)

    def at(a_, b_):
        return c + a_ * w + b_ * u

    rep = {}
    for t, key in enumerate(zip(ia.tolist(), ib.tolist())):
        if key not in rep:
            rep[key] = t
    columns = defaultdict(set)
    for (ca, cb) in rep:
        columns[ca].add(cb)
    # a target sitting exactly on a grid corner stands in for that corner
    on_corner = {tuple(x): tvids[t] for t, x in enumerate(inst.targets.tolist())}
    corner_vid = {}
    bottom = {}
    for ca, rows in sorted(columns.items()):
        a_ = -rho + ca * cell
        levels = sorted(rows | {0})
        vids = []
        for r in levels:
            z = at(a_, -rho + r * cell)
            vid = on_corner.get(tuple(z.tolist()))
            vids.append(g.add_vertex(z) if vid is None else vid)
        for r, v in zip(levels, vids):
            corner_vid[(ca, r)] = v
        bottom[ca] = vids[0]
        g.add_path(vids)
        info["grid_weight"] += (levels[-1] - levels[0]) * cell
    for (ca, cb), t in rep.items():
        z = corner_vid[(ca, cb)]
        g.add_edge(z, tvids[t])
        info["grid_weight"] += float(np.linalg.norm(np.asarray(g.coord(z)) - inst.targets[t]))
        info["corners"].append(z)
    cols = sorted(bottom)
    n_before = g.n_vertices
    _slt_into(g, src, p, at(-rho, -rho), at(rho, -rho), [bottom[ca] for ca in cols],
              np.array([at(-rho + ca * cell, -rho) for ca in cols]), eps)
    info["slt_vertices"] = g.n_vertices - n_before
    return info


def _new_graph(inst) -> tuple:
    g = GeometricGraph(2)
    src = g.add_vertex(inst.source, steiner=False, key=inst.source_key)
    tv = [g.add_vertex(x, steiner=False, key=k) for x, k in zip(inst.targets, inst.target_keys)]
    return g, src, tv


def _check_sss(inst: SssInstance) -> None:
    _check_eps(inst.eps)
    # the in-cell hop bound (1 + g*eps) * sqrt(2) * eps <= 2 * sqrt(2) * eps needs g*eps <= 1
    if inst.host_quality * inst.eps > 1.0:
        raise SteinerTreeError(
            f"host spanner quality g={inst.host_quality} exceeds 1/eps={1 / inst.eps:.4g}")
    if len(inst.targets):
        r = np.linalg.norm(inst.targets - inst.center, axis=1)
        if np.any(r > inst.radius * (1 + 1e-9)):
            raise SteinerTreeError(f"target {int(np.argmax(r))} lies outside the disc")


def build_sss_unit(inst: SssInstance) -> GeometricGraph:
    """Single-source spanner from the source to targets in a disc at unit distance.

    A grid of cell side ``eps`` (in units of the source distance) covers the
    disc's bounding square, oriented along source->center. Each nonempty cell
    links one of its targets to the cell's lowest corner; the column lines
    through used corners run to the near side of the square, and a
    shallow-light tree connects the source to the grid points used there.
    Distances inside a cell are left to the host spanner of the targets.
    """
    _check_sss(inst)
    g, src, tv = _new_graph(inst)
    g.info = _sss_unit_into(g, src, inst, tv)
    return g


def _cover_discs(inst: SssInstance):
    """Group targets onto small discs that each sit at unit distance from the source."""
    eps = inst.eps
    se = math.sqrt(eps)
    gap = inst.gap
    if inst.radius <= se * gap * (1 + 1e-12):
        return [(inst.center, inst.radius, np.arange(len(inst.targets)))]
    small = se * gap / (1 + (1 + 1 / math.sqrt(2)) * se)
    if inst.radius <= small:
        return [(inst.center, inst.radius, np.arange(len(inst.targets)))]
    u, w = _frame(inst.source, inst.center)
    rel = inst.targets - inst.center
    la, lb = np.round(rel @ w / small).astype(np.int64), np.round(rel @ u / small).astype(np.int64)
    groups = defaultdict(list)
    for t, key in enumerate(zip(la.tolist(), lb.tolist())):
        groups[key].append(t)
    out = []
    for (ka, kb), ts in sorted(groups.items()):
        out.append((inst.center + ka * small * w + kb * small * u, small, np.asarray(ts)))
    return out


def build_sss_scaled(inst: SssInstance) -> GeometricGraph:
    """Single-source spanner for a disc of radius sqrt(eps)*L at distance L/h.

    The disc is covered by a square lattice of small discs (pitch equal to
    their radius) sized so that each sits at unit distance from the source;
    one unit construction runs per nonempty small disc.
    """
    _check_sss(inst)
    if inst.gap <= 0:
        raise SteinerTreeError("source lies inside the disc")
    g, src, tv = _new_graph(inst)
    discs = _cover_discs(inst)
    info = {"discs": 0, "grid_weight": 0.0, "corners": []}
    for center, rad, ts in discs:
        sub = SssInstance(inst.source, center, rad, inst.targets[ts], inst.eps, inst.host_quality,
                          [inst.target_keys[t] for t in ts], inst.source_key)
        part = _sss_unit_into(g, src, sub, [tv[t] for t in ts])
        info["discs"] += 1
        info["grid_weight"] += part["grid_weight"]
        info["corners"].extend(part["corners"])
    g.info = info
    return g
