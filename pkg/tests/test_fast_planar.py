import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lightspanner import _kernels
from lightspanner.fast_planar import base_spanner, fast_build, theta_edges
from lightspanner.generators import generate
from lightspanner.geometry import GeometryError
from lightspanner.graph import sampled_original_pairs, verify_stretch
from lightspanner.planar import build_planar_spanner
from oracles import exact_stretch


def brute_cone(pts, a0, a1, margin=0.0):
    """Nearest point along the bisector inside cone [a0, a1) of each point, or -1.

    ``margin`` shrinks the cone on both sides to drop boundary points.
    """
    mid = 0.5 * (a0 + a1)
    axis = np.array([math.cos(mid), math.sin(mid)])
    out = np.full(len(pts), -1)
    best = np.full(len(pts), np.inf)
    for i, p in enumerate(pts):
        for j, q in enumerate(pts):
            if i == j:
                continue
            ang = math.atan2(q[1] - p[1], q[0] - p[0]) % (2 * math.pi)
            if a0 + margin <= ang < a1 - margin:
                proj = float((q - p) @ axis)
                if proj < best[i]:
                    best[i], out[i] = proj, j
    return out, best


@pytest.mark.parametrize("kind", ["uniform", "grid", "clustered"])
@pytest.mark.parametrize("cones", [8, 16])
def test_theta_cone_matches_brute_force(kind, cones):
    pts = generate(kind, 120, 2, 11)
    step = 2 * math.pi / cones
    for j in range(cones):
        a0, a1 = j * step, (j + 1) * step
        got = _kernels.theta_cone(np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]), a0, a1)
        ref, _ = brute_cone(pts, a0, a1)
        inner, inner_best = brute_cone(pts, a0, a1, margin=1e-9)
        axis = np.array([math.cos(a0 + step / 2), math.sin(a0 + step / 2)])
        mismatch = np.flatnonzero(got != ref)
        for i in mismatch:
            # disagreement is only allowed when rounding at a cone edge decides membership
            if got[i] < 0:
                assert inner[i] < 0
            else:
                assert float((pts[got[i]] - pts[i]) @ axis) <= inner_best[i] + 1e-9
        assert len(mismatch) <= len(pts) // 4


def test_theta_edges_shape():
    pts = generate("uniform", 50, 2, 0)
    e = theta_edges(pts, 8)
    assert e.shape[1] == 2 and len(e) <= 50 * 8
    assert np.all(e[:, 0] != e[:, 1])


def test_base_spanner_two_points():
    b = base_spanner(np.array([[0.0, 0.0], [1.0, 1.0]]), 0.25)
    assert b.graph.n_edges == 1


def test_base_spanner_edge_count_on_grid():
    pts = generate("grid", 1000, 2, 0)
    eps = 0.25
    b = base_spanner(pts, eps)
    assert b.graph.n_edges <= eps ** -2 * len(pts) * math.log2(len(pts))
    assert b.graph.n_edges <= 8 * len(pts)
    assert b.sampled_stretch <= 1 + eps


def test_base_spanner_large_sampled():
    pts = generate("uniform", 10_000, 2, 1)
    b = base_spanner(pts, 0.5)
    worst, _, ok = verify_stretch(b.graph, sampled_original_pairs(b.graph, 2000, seed=9, n_sources=40), 1.5)
    assert ok and worst <= 1.5


def test_base_spanner_exact_small():
    pts = generate("clustered", 400, 2, 2)
    b = base_spanner(pts, 0.1)
    assert exact_stretch(b.graph) <= 1.1


def test_fast_two_points():
    g, rep = fast_build([[0, 0], [1, 0]], 0.25)
    assert g.n_edges == 1 and rep.lightness == 1


def test_fast_rejects_3d():
    with pytest.raises(GeometryError):
        fast_build(np.random.default_rng(0).random((10, 3)), 0.25)


def test_fast_endpoint_budget():
    pts = generate("uniform", 1000, 2, 3)
    g, rep = fast_build(pts, 0.25)
    assert rep.extra["endpoint_total"] <= 2 * rep.extra["base_edges"]
    assert sum(lv["n_squares"] for lv in rep.extra["levels"]) <= rep.extra["endpoint_total"]
    assert rep.max_stretch <= 1.25 and rep.exact


def test_fast_vs_planar_300():
    pts = generate("uniform", 300, 2, 5)
    gf, rf = fast_build(pts, 0.25)
    gp, rp = build_planar_spanner(pts, 0.25)
    assert exact_stretch(gf) <= 1.25 and exact_stretch(gp) <= 1.25
    assert max(rf.lightness, rp.lightness) <= 3 * min(rf.lightness, rp.lightness)


@settings(max_examples=12, deadline=None)
@given(st.integers(3, 150), st.integers(0, 2**31 - 1), st.sampled_from([0.5, 0.25, 0.1]),
       st.sampled_from(["uniform", "clustered", "grid"]))
def test_fast_stretch_property(n, seed, eps, kind):
    g, _ = fast_build(generate(kind, n, 2, seed), eps, seed=seed)
    assert exact_stretch(g) <= 1 + eps
