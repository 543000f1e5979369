"""Euclidean primitives: distances, spread, bounding squares and a floor-function grid."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist


class GeometryError(ValueError):
    pass


def as_points(points) -> np.ndarray:
    """Return ``points`` as a float (n, d) array, validating shape and finiteness."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 1)
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise GeometryError(f"expected an (n, d) array of points, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GeometryError("point coordinates must be finite")
    return arr


@dataclass(frozen=True)
class PointSet:
    """Ordered, duplicate-free set of points in R^d."""

    coords: np.ndarray

    def __post_init__(self):
        arr = as_points(self.coords)
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)
        if len(arr) > 1:
            uniq = np.unique(arr, axis=0)
            if len(uniq) != len(arr):
                raise GeometryError("point set contains duplicate points")

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]


def dist(p: Sequence[float], q: Sequence[float]) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise GeometryError(f"dimension mismatch: {p.shape} vs {q.shape}")
    return math.sqrt(float(np.dot(p - q, p - q)))


def min_max_pairwise(points) -> Tuple[float, float]:
    """Smallest and largest pairwise distance.

    Exact brute force for small inputs; above that the minimum comes from
    nearest-neighbour queries and the maximum from the convex hull (2-D/3-D)
    or brute force.
    """
    arr = as_points(points)
    n = len(arr)
    if n < 2:
        raise GeometryError("need at least two points")
    if n <= 2000:
        d = pdist(arr)
        return float(d.min()), float(d.max())
    tree = cKDTree(arr)
    dd, _ = tree.query(arr, k=2)
    lo = float(dd[:, 1].min())
    hull_pts = arr
    if arr.shape[1] in (2, 3):
        from scipy.spatial import ConvexHull

        try:
            hull_pts = arr[ConvexHull(arr).vertices]
        except Exception:  # degenerate (collinear/coplanar) input
            hull_pts = arr
    if len(hull_pts) <= 4000:
        hi = float(pdist(hull_pts).max())
    else:
        hi = 0.0
        for start in range(0, len(hull_pts), 1000):
            block = hull_pts[start:start + 1000]
            diff = block[:, None, :] - hull_pts[None, :, :]
            hi = max(hi, float(np.sqrt((diff ** 2).sum(-1)).max()))
    return lo, hi


def spread(points) -> float:
    lo, hi = min_max_pairwise(points)
    if lo == 0.0:
        raise GeometryError("duplicate points give infinite spread")
    return hi / lo


@dataclass(frozen=True)
class Square:
    """Axis-aligned hypercube given by its low corner and side length."""

    origin: np.ndarray
    side: float

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.origin) and np.all(p <= self.origin + self.side))


def bounding_square(points) -> Square:
    arr = as_points(points)
    if len(arr) == 0:
        raise GeometryError("empty point set has no bounding square")
    lo = arr.min(axis=0)
    side = float((arr.max(axis=0) - lo).max())
    return Square(origin=lo, side=side)


def grid_cell(p, origin, cell_size: float) -> Tuple[int, ...]:
    """Integer cell coordinates of ``p`` under the half-open, low-inclusive convention."""
    if not cell_size > 0:
        raise GeometryError(f"cell size must be positive, got {cell_size}")
    p = np.asarray(p, dtype=float)
    origin = np.asarray(origin, dtype=float)
    return tuple(int(v) for v in np.floor((p - origin) / cell_size))


def grid_cells(points, origin, cell_size: float) -> np.ndarray:
    """Vectorised :func:`grid_cell` for an (n, d) array."""
    if not cell_size > 0:
        raise GeometryError(f"cell size must be positive, got {cell_size}")
    arr = as_points(points)
    return np.floor((arr - np.asarray(origin, dtype=float)) / cell_size).astype(np.int64)


@dataclass
class GridIndex:
    origin: np.ndarray
    cell_size: float
    buckets: Dict[Tuple[int, ...], List[int]] = field(default_factory=lambda: defaultdict(list))

    @classmethod
    def build(cls, points, cell_size: float, origin=None) -> "GridIndex":
        arr = as_points(points)
        if origin is None:
            origin = arr.min(axis=0) if len(arr) else np.zeros(arr.shape[1])
        g = cls(np.asarray(origin, dtype=float), float(cell_size))
        for i, c in enumerate(map(tuple, grid_cells(arr, g.origin, g.cell_size).tolist())):
            g.buckets[c].append(i)
        return g

    def cell(self, p) -> Tuple[int, ...]:
        return grid_cell(p, self.origin, self.cell_size)

    def neighbors(self, cell: Tuple[int, ...], reach: int = 1):
        """Point ids in the (2*reach+1)^d block of cells around ``cell``."""
        d = len(cell)
        offsets = np.stack(np.meshgrid(*[np.arange(-reach, reach + 1)] * d, indexing="ij"), -1).reshape(-1, d)
        for off in offsets:
            key = tuple(int(a + b) for a, b in zip(cell, off))
            bucket = self.buckets.get(key)
            if bucket:
                yield from bucket
