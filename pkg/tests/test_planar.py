import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse.csgraph import dijkstra
from scipy.spatial.distance import pdist

from lightspanner.generators import boundary_spaced, generate
from lightspanner.geometry import GeometryError
from lightspanner.graph import GeometricGraph
from lightspanner.nets import greedy_net
from lightspanner.planar import (
    BANDS, BAND_WIDTH, SQUARE_CORE, SQUARE_PAD, LevelBuilder, PairClass, bisector_points,
    build_planar_spanner, normalize, normalize_and_partition, pair_level, partition_pairs,
    prefilter_light_pairs, square_key, square_low, squares_containing,
)
from oracles import exact_stretch


def test_partition_examples():
    classes = normalize_and_partition([[0, 0], [1, 0], [0, 1.5]])
    assert len(classes) == 1 and len(classes[0]) == 3 and classes[0].level == 1
    assert int(pair_level(5.0)) == 3
    assert int(pair_level(1.0)) == 1 and int(pair_level(1.999)) == 1 and int(pair_level(2.0)) == 2
    classes = normalize_and_partition([[0.0], [1.0], [16.0]])
    assert [c.level for c in classes] == [1, 2, 3, 4]
    assert len(classes[3]) == 2  # 15 and the closed top value 16


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 60), st.integers(0, 2**31 - 1), st.sampled_from(["uniform", "clustered", "grid"]))
def test_partition_is_exact(n, seed, kind):
    pts, _, _ = normalize(generate(kind, n, 2, seed))
    classes = partition_pairs(pts)
    seen = set()
    for pc in classes:
        d = np.sqrt(((pts[pc.i] - pts[pc.j]) ** 2).sum(1))
        top = pc is classes[-1]
        assert np.all(d >= 2.0 ** (pc.level - 1) * (1 - 1e-12))
        assert np.all(d < 2.0 ** pc.level) or (top and np.all(d <= 2.0 ** pc.level * (1 + 1e-12)))
        for a, b in zip(pc.i.tolist(), pc.j.tolist()):
            seen.add((min(a, b), max(a, b)))
    assert len(seen) == n * (n - 1) // 2
    sp = pdist(pts).max() / pdist(pts).min()
    assert len(classes) == max(1, math.ceil(math.log2(sp) - 1e-12))


def test_prefilter_examples():
    pts = np.array([[0.0, 0.0], [0.2, 0.0], [2.2, 0.0], [4.0, 0.0]])
    classes = partition_pairs(pts)
    seed, reduced = prefilter_light_pairs(pts, classes)
    assert seed.tolist() == [[0, 1]]
    assert sum(map(len, reduced)) == 5
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    seed, reduced = prefilter_light_pairs(pts, partition_pairs(pts))
    assert len(seed) == 0 and sum(map(len, reduced)) == 3
    seed, reduced = prefilter_light_pairs(pts, partition_pairs(pts), mst_w=1e6)
    assert len(seed) == 3 and sum(map(len, reduced)) == 0


def test_prefilter_reduces_class_count():
    rng = np.random.default_rng(0)
    # clusters at wildly different scales give a large spread
    pts = np.concatenate([rng.random((20, 2)) * 10.0 ** -k + k for k in range(6)])
    pts, _, _ = normalize(pts)
    classes = partition_pairs(pts)
    _, reduced = prefilter_light_pairs(pts, classes)
    n = len(pts)
    assert sum(1 for c in reduced if len(c)) <= math.ceil(2 * math.log2(n)) + 2
    assert sum(1 for c in classes if len(c)) > sum(1 for c in reduced if len(c))
    g, rep = build_planar_spanner(pts, 0.25, prefilter_logn=True)
    assert rep.max_stretch <= 1.25 and rep.extra["prefilter_edges"] > 0


def test_squares_per_point():
    rng = np.random.default_rng(1)
    for L in (1.0, 4.0, 64.0):
        pts = rng.random((2000, 2)) * 50 * L
        counts = [len(squares_containing(p, L)) for p in pts]
        assert 1 <= min(counts) and max(counts) <= 4
        for p in pts[:200]:
            for key in squares_containing(p, L):
                lo = square_low(key, L)
                assert np.all(lo <= p) and np.all(p < lo + (SQUARE_CORE + 2 * SQUARE_PAD) * L)


@pytest.mark.parametrize("eps_int", [1 / 16, 1 / 128])
def test_pair_balls_fit_one_square(eps_int):
    """Every pair's covering balls lie in the square keyed by the first net point."""
    pts, _, _ = normalize(generate("uniform", 400, 2, 3))
    for pc in partition_pairs(pts):
        L = pc.scale
        rho = math.sqrt(eps_int) * L
        net = greedy_net(pts, rho, subset=np.unique(np.r_[pc.i, pc.j]))
        px, py = pts[net.cover_of[pc.i]], pts[net.cover_of[pc.j]]
        for a, b in zip(px, py):
            lo = square_low(square_key(a, L), L)
            hi = lo + (SQUARE_CORE + 2 * SQUARE_PAD) * L
            for c in (a, b):
                assert np.all(c - rho >= lo) and np.all(c + rho <= hi)


def test_band_geometry():
    assert BANDS == (SQUARE_CORE + 2 * SQUARE_PAD) / BAND_WIDTH
    for eps in (1 / 16, 1 / 64, 1 / 256):
        pos = bisector_points(1.0, eps)
        assert len(pos) <= 9 / math.sqrt(eps) + 2
        assert np.all(np.diff(pos) <= math.sqrt(eps) * (1 + 1e-12))
        assert pos[0] == 0 and pos[-1] == pytest.approx(9.0)


def test_band_separation_at_small_eps():
    pts = generate("uniform", 300, 2, 4)
    _, rep = build_planar_spanner(pts, 1 / 16, verify=False)
    assert sum(lv["adjacent_bands"] for lv in rep.extra["levels"]) == 0
    assert sum(lv["same_net"] for lv in rep.extra["levels"]) == 0


def test_single_pair_level():
    pts = np.array([[0.0, 0.0], [1.2, 0.0]])
    g = GeometricGraph.from_points(pts)
    eps = 1 / 16
    st_ = LevelBuilder(pts, g, eps / 8, 1 + eps).build(PairClass(1, np.array([0]), np.array([1])))
    assert st_.n_routed == 1 and st_.repairs == 0
    d = dijkstra(g.csr(), indices=0)[1]
    assert d <= (1 + eps) * 1.2


def test_empty_level():
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    g = GeometricGraph.from_points(pts)
    st_ = LevelBuilder(pts, g, 0.01, 1.1).build(PairClass(3, np.array([], int), np.array([], int)))
    assert st_.n_pairs == 0 and g.n_edges == 0


def test_two_points():
    g, rep = build_planar_spanner([[0, 0], [3, 4]], 0.25)
    assert g.n_edges == 1 and rep.lightness == pytest.approx(1.0) and rep.max_stretch == pytest.approx(1.0)


def test_rejects_bad_input():
    with pytest.raises(GeometryError):
        build_planar_spanner(np.zeros((3, 3)) + np.arange(3)[:, None], 0.25)
    with pytest.raises(ValueError):
        build_planar_spanner([[0, 0], [1, 1]], 1.5)


def test_boundary_instance():
    eps = 1 / 16
    g, rep = build_planar_spanner(boundary_spaced(eps), eps)
    assert exact_stretch(g) <= 1 + eps
    assert rep.lightness > 1


def test_uniform_300():
    pts = generate("uniform", 300, 2, 7)
    g, rep = build_planar_spanner(pts, 0.25)
    s = exact_stretch(g)
    assert s <= 1.25
    assert rep.max_stretch == pytest.approx(s, rel=1e-9)
    g.check_weights()
    assert len(g.original_ids) == 300
    assert np.allclose(g.coords[:300], pts)


def test_level_weight_constant_is_stable():
    cs = []
    for seed in range(4):
        pts = generate("uniform", 200, 2, seed)
        for eps in (1 / 16, 0.25):
            _, rep = build_planar_spanner(pts, eps, verify=False)
            mst_norm = rep.mst_weight / pdist(pts).min()
            cs.append(max(lv["weight_added"] for lv in rep.extra["levels"]) * rep.extra["eps_int"] / mst_norm)
    assert max(cs) / min(cs) <= 3
    for kind in ("clustered", "grid"):
        _, rep = build_planar_spanner(generate(kind, 200, 2, 0), 0.25, verify=False)
        mst_norm = rep.mst_weight / pdist(generate(kind, 200, 2, 0)).min()
        assert max(lv["weight_added"] for lv in rep.extra["levels"]) * rep.extra["eps_int"] / mst_norm <= 1


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 80), st.integers(0, 2**31 - 1), st.sampled_from([0.5, 0.25, 0.1]),
       st.sampled_from(["uniform", "clustered", "grid"]))
def test_stretch_property(n, seed, eps, kind):
    g, rep = build_planar_spanner(generate(kind, n, 2, seed), eps)
    assert exact_stretch(g) <= 1 + eps
