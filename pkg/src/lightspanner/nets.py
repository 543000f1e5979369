"""r-nets and r-covers: greedy scan, floor-grid construction, and cover validation."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .geometry import GeometryError, as_points, grid_cells


class CoverError(ValueError):
    pass


@dataclass
class NetAssignment:
    radius: float
    net: List[int]
    cover_of: np.ndarray  # cover_of[x] = covering net point id, -1 for ids outside the subset

    def groups(self) -> Dict[int, List[int]]:
        """Net point -> ids of the points it covers (itself included)."""
        out: Dict[int, List[int]] = defaultdict(list)
        for x, c in enumerate(self.cover_of.tolist()):
            if c >= 0:
                out[c].append(x)
        return out

    def check(self, points, packing: bool = True, subset: Optional[Sequence[int]] = None) -> None:
        """Brute-force validation of the cover (and optionally packing) property."""
        arr = as_points(points)
        ids = np.arange(len(arr)) if subset is None else np.asarray(subset, dtype=np.int64)
        net = np.asarray(self.net, dtype=np.int64)
        if len(ids) and len(net) == 0:
            raise CoverError("empty net for a nonempty point set")
        cov = self.cover_of[ids]
        if np.any(cov < 0):
            raise CoverError(f"point {int(ids[np.argmax(cov < 0)])} has no cover")
        d = np.sqrt(((arr[ids] - arr[cov]) ** 2).sum(1))
        if np.any(d > self.radius):
            k = int(np.argmax(d))
            raise CoverError(f"point {int(ids[k])} is {d[k]:.6g} > {self.radius:.6g} from its cover")
        if np.any(self.cover_of[net] != net):
            raise CoverError("a net point is not covered by itself")
        if packing and len(net) > 1:
            from scipy.spatial.distance import pdist

            if pdist(arr[net]).min() <= self.radius:
                raise CoverError("net points closer than the radius")


def _subset(arr: np.ndarray, subset) -> np.ndarray:
    return np.arange(len(arr)) if subset is None else np.asarray(subset, dtype=np.int64)


def greedy_net(points, r: float, subset: Optional[Sequence[int]] = None) -> NetAssignment:
    """Scan points in input order; a point joins the net iff it is farther than r from all net points."""
    if not r > 0:
        raise GeometryError(f"net radius must be positive, got {r}")
    arr = as_points(points)
    ids = _subset(arr, subset)
    cover = np.full(len(arr), -1, dtype=np.int64)
    net: List[int] = []
    if len(ids) == 0:
        return NetAssignment(r, net, cover)
    origin = arr[ids].min(axis=0)
    cells = grid_cells(arr[ids], origin, r)
    d = arr.shape[1]
    offsets = list(product((-1, 0, 1), repeat=d))
    buckets: Dict[tuple, List[int]] = defaultdict(list)
    r2 = r * r
    for x, cell in zip(ids.tolist(), map(tuple, cells.tolist())):
        px = arr[x]
        found = -1
        for off in offsets:
            for q in buckets.get(tuple(a + b for a, b in zip(cell, off)), ()):
                diff = arr[q] - px
                if diff @ diff <= r2 and (found < 0 or q < found):
                    found = q
        if found < 0:
            net.append(x)
            buckets[cell].append(x)
            cover[x] = x
        else:
            cover[x] = found
    return NetAssignment(r, net, cover)


def grid_net(points, r: float, subset: Optional[Sequence[int]] = None) -> NetAssignment:
    """r-net built cell by cell on a grid of side r.

    Points are bucketed by floor((p - origin) / r); buckets are visited in
    first-seen order and a point joins the net iff no net point within r
    exists in the 3^d surrounding cells. Only nonempty cells are stored.
    """
    if not r > 0:
        raise GeometryError(f"net radius must be positive, got {r}")
    arr = as_points(points)
    ids = _subset(arr, subset)
    cover = np.full(len(arr), -1, dtype=np.int64)
    net: List[int] = []
    if len(ids) == 0:
        return NetAssignment(r, net, cover)
    origin = arr[ids].min(axis=0)
    cells = grid_cells(arr[ids], origin, r)
    members: Dict[tuple, List[int]] = defaultdict(list)
    for x, cell in zip(ids.tolist(), map(tuple, cells.tolist())):
        members[cell].append(x)
    d = arr.shape[1]
    offsets = list(product((-1, 0, 1), repeat=d))
    net_in: Dict[tuple, List[int]] = {}
    r2 = r * r
    for cell, xs in members.items():
        near = []
        for off in offsets:
            near.extend(net_in.get(tuple(a + b for a, b in zip(cell, off)), ()))
        mine: List[int] = []
        for x in xs:
            px = arr[x]
            found = -1
            for q in near:
                diff = arr[q] - px
                if diff @ diff <= r2:
                    found = q
                    break
            if found < 0:
                net.append(x)
                near.append(x)
                mine.append(x)
                cover[x] = x
            else:
                cover[x] = found
        if mine:
            net_in[cell] = mine
    return NetAssignment(r, net, cover)


def cover_only(points, centers: Sequence[int], r: float, subset: Optional[Sequence[int]] = None) -> NetAssignment:
    """Assign each point to the first listed center within r; no packing requirement."""
    arr = as_points(points)
    ids = _subset(arr, subset)
    centers = [int(c) for c in centers]
    cover = np.full(len(arr), -1, dtype=np.int64)
    if len(ids) == 0:
        return NetAssignment(r, centers, cover)
    if not centers:
        raise CoverError(f"point {int(ids[0])} is not covered: no centers")
    rank = {c: k for k, c in enumerate(centers)}
    tree = cKDTree(arr[centers])
    hits = tree.query_ball_point(arr[ids], r * (1 + 1e-12))
    for x, h in zip(ids.tolist(), hits):
        if x in rank:
            cover[x] = x
            continue
        ok = [centers[j] for j in h if np.linalg.norm(arr[centers[j]] - arr[x]) <= r]
        if not ok:
            raise CoverError(f"point {x} is not within {r} of any center")
        cover[x] = min(ok, key=rank.__getitem__)
    return NetAssignment(r, centers, cover)
