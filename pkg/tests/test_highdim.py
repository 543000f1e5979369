import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.distance import pdist

from lightspanner.generators import generate
from lightspanner.geometry import GeometryError
from lightspanner.highdim import (
    C_TREE, ChargingError, blackbox_stp, build_charging_cover_tree, build_highdim_spanner, build_level_graph,
    check_charging, check_cover, check_et_diameter, check_sci, class_of, delta_values, internal_eps,
    partition_edge_classes, split_tree,
)
from oracles import exact_stretch

# Low enough that high-degree nodes and charging actually occur at these sizes.
OVERRIDE = 16


def test_class_of_examples():
    assert int(class_of(3.0, 1.0, 0.25)) == 1
    for i in range(1, 5):
        assert int(class_of(4.0 ** i, 1.0, 0.25)) == i
        assert int(class_of(4.0 ** i * 0.5000001, 1.0, 0.25)) == i
    assert int(class_of(2.0, 1.0, 0.25)) == 0  # belongs to delta=2
    assert int(class_of(8.0, 2.0, 0.25)) == 1


def test_internal_eps_and_offsets():
    assert internal_eps(0.5) == 0.125
    assert internal_eps(0.25) == 0.0625
    assert delta_values(1 / 8) == [1.0, 2.0, 4.0]


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 120), st.integers(0, 2**31 - 1), st.sampled_from([0.25, 0.125]))
def test_offsets_partition_all_pairs(n, seed, eps):
    pts = generate("uniform", n, 3, seed)
    pts = pts / pdist(pts).min() / eps
    claimed = np.zeros(n * (n - 1) // 2, int)
    i, j = np.triu_indices(n, k=1)
    index = {(a, b): k for k, (a, b) in enumerate(zip(i.tolist(), j.tolist()))}
    for delta in delta_values(eps):
        for ec in partition_edge_classes(pts, eps, delta):
            w = np.sqrt(((pts[ec.i] - pts[ec.j]) ** 2).sum(1))
            assert np.all(w > ec.L / 2) and np.all(w <= ec.L * (1 + 1e-12))
            for a, b in zip(ec.i.tolist(), ec.j.tolist()):
                claimed[index[(a, b)]] += 1
    assert np.all(claimed == 1)


def test_split_tree_path():
    n = 10
    label, small = split_tree(n, list(range(n - 1)), list(range(1, n)), [1.0] * (n - 1), np.zeros(n), 2.0)
    assert small == []
    for h in np.unique(label):
        members = np.flatnonzero(label == h)
        assert len(members) >= 2
        assert members.max() - members.min() <= 8


def test_split_tree_single_node():
    label, small = split_tree(1, [], [], [], np.zeros(1), 2.0)
    assert label.tolist() == [0] and small == [0]


def path_tree(n=10, delta=2.0, eps=0.25, levels=1):
    pts = np.stack([np.arange(n, dtype=float), np.zeros(n)], 1)
    return build_charging_cover_tree(pts, n, np.arange(n - 1), np.arange(1, n), eps, delta, {}, levels)


def test_path_cover_tree_level_one():
    tree = path_tree()
    lv = tree.levels[0]
    assert np.all(lv.n_desc >= 2)
    assert np.all(lv.diam <= 8)
    check_cover(tree)


def test_level_graph():
    anc = np.arange(5)
    lg = build_level_graph(anc, anc, 1, [], [], 3)
    assert len(lg.u) == 0 and lg.high == []
    lg = build_level_graph(anc, anc, 1, [0], [1], 3)
    assert len(lg.u) == 1 and lg.degree[0] == 1
    k = int(math.ceil(4 * C_TREE / 0.25))
    anc = np.arange(k + 1)
    lg = build_level_graph(anc, anc, 1, np.zeros(k, int), np.arange(1, k + 1), 4 * C_TREE / 0.25)
    assert lg.high == [0]
    # pairs whose ends share a cover point give no edge
    lg = build_level_graph(np.array([0, 0, 2]), np.array([0, 2]), 1, [0, 0], [1, 2], 1)
    assert len(lg.u) == 1


def test_blackbox_stp():
    assert blackbox_stp(np.zeros((1, 3)), 0.1).n_edges == 0
    assert blackbox_stp(np.array([[0.0, 0, 0], [1, 1, 1]]), 0.1).n_edges == 1
    q = generate("uniform", 100, 3, 0)
    g = blackbox_stp(q, 0.25)
    assert exact_stretch(g) <= 1.25
    assert blackbox_stp(q[:10], 0.25, "complete").n_edges == 45


def trees_of(pts, eps_int, thr):
    _, rep = build_highdim_spanner(pts, 0.5, eps_int=eps_int, degree_threshold=thr, keep_trees=True, verify=False)
    return rep, rep.extra["trees"]


@pytest.mark.parametrize("thr", [None, OVERRIDE])
def test_cover_tree_validators_200_points(thr):
    pts = generate("uniform", 200, 3, 1)
    rep, trees = trees_of(pts, 0.25, thr)
    for t in trees:
        check_cover(t)
        check_sci(t)
        check_charging(t)
        assert check_et_diameter(t, 2000) <= 1
    charged = sum(int((t.charged_at >= 0).sum()) for t in trees)
    if thr is None:
        assert charged == 0  # 4c/eps is out of reach at this size
    else:
        assert charged > 0


def test_validators_catch_tampering():
    pts = generate("uniform", 200, 3, 1)
    _, trees = trees_of(pts, 0.25, OVERRIDE)
    t = next(t for t in trees if any(lv.charged for lv in t.levels))
    lv = next(lv for lv in t.levels if lv.charged)
    p = next(iter(lv.charged))
    lv.charged[p] = lv.charged[p][:-1]
    with pytest.raises(ChargingError):
        check_charging(t)
    t = trees[0]
    t.levels[0].anc = t.levels[0].anc.copy()
    far = int(np.argmax(((t.pts - t.pts[0]) ** 2).sum(1)))
    t.levels[0].anc[far] = 0
    with pytest.raises(ChargingError):
        check_cover(t)


def test_et_sandwich_and_weight():
    pts = generate("clustered", 300, 3, 2)
    rep, trees = trees_of(pts, 0.25, OVERRIDE)
    mst_sub = rep.extra["mst_subdivided_weight"]
    for run in rep.extra["runs"]:
        # E_T contains a spanning tree of the subdivided points, so it can't be lighter than their MST
        assert run["et_weight"] >= mst_sub * (1 - 1e-9)
        assert run["et_weight"] <= 3 * run["levels"] * mst_sub


def test_max_charge_stable_as_n_doubles():
    charges = []
    for n in (150, 300):
        rep, _ = trees_of(generate("uniform", n, 3, 3), 0.25, OVERRIDE)
        charges.append(rep.extra["max_charge"])
    assert charges[1] <= 3 * max(charges[0], 1.0)


def test_highdim_two_points_and_errors():
    g, rep = build_highdim_spanner([[0, 0, 0], [1, 2, 2]], 0.25)
    assert g.n_edges == 1 and rep.lightness == 1
    with pytest.raises(GeometryError):
        build_highdim_spanner([[0, 0, 0], [0, 0, 0], [1, 1, 1]], 0.25)
    with pytest.raises(ValueError):
        build_highdim_spanner([[0, 0], [1, 1]], 1.0)


def test_highdim_150_points_exact():
    pts = generate("uniform", 150, 3, 4)
    g, rep = build_highdim_spanner(pts, 0.25)
    assert exact_stretch(g) <= 1.25
    assert rep.max_stretch == pytest.approx(exact_stretch(g), rel=1e-9)
    assert np.allclose(g.coords[:150], pts)
    g.check_weights(1e-9)


@settings(max_examples=8, deadline=None)
@given(st.integers(3, 80), st.integers(0, 2**31 - 1), st.integers(2, 4), st.sampled_from([0.5, 0.25]))
def test_highdim_stretch_property(n, seed, d, eps):
    g, _ = build_highdim_spanner(generate("uniform", n, d, seed), eps)
    assert exact_stretch(g) <= 1 + eps
