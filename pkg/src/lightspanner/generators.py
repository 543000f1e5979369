"""Seeded point-set generators."""

from __future__ import annotations

import math

import numpy as np

KINDS = ("uniform", "grid", "boundary-spaced", "clustered")


def uniform(n: int, dim: int = 2, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).random((n, dim))


def grid(n: int, dim: int = 2, seed: int = 0) -> np.ndarray:
    """First ``n`` points of the smallest cube lattice holding ``n`` points, unit spacing."""
    side = max(1, math.ceil(round(n ** (1.0 / dim), 9)))
    axes = np.meshgrid(*[np.arange(side, dtype=float)] * dim, indexing="ij")
    return np.stack([a.ravel() for a in axes], 1)[:n]


def boundary_spaced(eps: float) -> np.ndarray:
    """4*ceil(1/sqrt(eps)) points at equal arc spacing on the unit square's boundary."""
    m = math.ceil(1.0 / math.sqrt(eps) - 1e-9)
    t = np.arange(m) / m
    zero, one = np.zeros(m), np.ones(m)
    return np.concatenate([
        np.stack([t, zero], 1), np.stack([one, t], 1),
        np.stack([1 - t, one], 1), np.stack([zero, 1 - t], 1),
    ])


def clustered(n: int, dim: int = 2, seed: int = 0, n_clusters: int = 8, spread: float = 0.02) -> np.ndarray:
    """Gaussian blobs around uniform centres; duplicates are nudged apart."""
    rng = np.random.default_rng(seed)
    centres = rng.random((n_clusters, dim))
    pick = rng.integers(n_clusters, size=n)
    pts = centres[pick] + rng.normal(scale=spread, size=(n, dim))
    _, first = np.unique(pts, axis=0, return_index=True)
    if len(first) < n:
        dup = np.setdiff1d(np.arange(n), first)
        pts[dup] += rng.random((len(dup), dim)) * 1e-6
    return pts


def generate(kind: str, n: int = 100, dim: int = 2, seed: int = 0, eps: float = 0.25) -> np.ndarray:
    if kind == "uniform":
        return uniform(n, dim, seed)
    if kind == "grid":
        return grid(n, dim, seed)
    if kind == "boundary-spaced":
        if dim != 2:
            raise ValueError("boundary-spaced points are planar")
        return boundary_spaced(eps)
    if kind == "clustered":
        return clustered(n, dim, seed)
    raise ValueError(f"unknown generator {kind!r}; choose from {', '.join(KINDS)}")
