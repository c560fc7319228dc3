import math

import numpy as np
import pytest

from mpslc.core import InputError, Metric, PointSet, Seed, UnsupportedMetricError
from mpslc.mpc import SpanningTree
from mpslc.oracle import exact_mst, exhaustive_slc
from mpslc.slc import (
    SlcParams,
    approximate_mst,
    derive_eps,
    k_slc_from_mst,
    verify_per_edge_guarantee,
)

from conftest import uniform_points


def chain_with_gap(n, gap=100.0):
    xs = list(np.arange(n - 1, dtype=float)) + [n - 2 + gap]
    return PointSet(points=np.asarray(xs).reshape(-1, 1), metric=Metric.L2)


def test_derive_eps_examples():
    assert derive_eps(3.0, 1, 1.0, 1.0, 1.0) == 0.5
    assert derive_eps(0.6, 5, 4.0, 1.0, 1.0) == pytest.approx(0.005)


def test_derive_eps_homogeneous_in_eta():
    assert derive_eps(1.0, 4, 2.0, 1.0, 1.0) * 2 == derive_eps(2.0, 4, 2.0, 1.0, 1.0)


def test_derive_eps_warns_above_three():
    with pytest.warns(UserWarning):
        derive_eps(3.5, 2, 1.0, 1.0, 1.0)


def test_derive_eps_rejects_nonpositive():
    with pytest.raises(InputError):
        derive_eps(0.0, 1, 1.0, 1.0, 1.0)


def test_params_reject_inconsistent_eps():
    ps = uniform_points(32, 2, seed=1)
    good = SlcParams.for_point_set(ps, eta=0.5, seed=Seed(1))
    with pytest.raises(InputError):
        SlcParams(eta=good.eta, repetitions=good.repetitions, c1=good.c1,
                  c2=good.c2, eps=good.eps * 2, partition=good.partition,
                  mpc=good.mpc, seed=good.seed)


def test_approximate_mst_single_point():
    ps = PointSet(points=np.array([[0.3, 0.4]]), metric=Metric.L2)
    tree, trace = approximate_mst(ps, SlcParams.for_point_set(ps, 0.5, Seed(1)))
    assert tree.edges == ()
    assert trace.rounds == 0


def test_approximate_mst_rejects_hamming():
    ps = PointSet(points=np.array([[0.0], [1.0]]), metric=Metric.L0)
    with pytest.raises(UnsupportedMetricError):
        approximate_mst(ps, SlcParams.for_point_set(
            PointSet(points=np.array([[0.0], [1.0]]), metric=Metric.L2),
            0.5, Seed(1)))


def test_approximate_mst_collinear():
    ps = PointSet(points=np.arange(5, dtype=float).reshape(-1, 1), metric=Metric.L2)
    params = SlcParams.for_point_set(ps, eta=0.5, seed=Seed(3))
    tree, _ = approximate_mst(ps, params)
    ws = tree.sorted_weights()
    assert len(ws) == 4
    assert np.all(ws <= 1.5)
    assert tree.total_weight() <= 4 * 1.5


def test_approximate_mst_chain_gap():
    ps = chain_with_gap(20)
    params = SlcParams.for_point_set(ps, eta=0.5, seed=Seed(5))
    tree, _ = approximate_mst(ps, params)
    ws = tree.sorted_weights()
    assert 100.0 <= ws[-1] <= 1.5 * 100.0
    clustering = k_slc_from_mst(tree, 2, ps)
    assert clustering.objective >= 100.0
    assert clustering.labels[-1] != clustering.labels[0]
    assert len({clustering.labels[i] for i in range(19)}) == 1


def test_approximate_mst_duplicates():
    pts = np.array([[0.0, 0.0], [0.0, 0.0], [0.5, 0.5], [1.0, 0.0]])
    ps = PointSet(points=pts, metric=Metric.L1)
    params = SlcParams.for_point_set(ps, eta=0.5, seed=Seed(7))
    tree, _ = approximate_mst(ps, params)
    assert tree.sorted_weights()[0] == 0.0
    assert len(tree.edges) == 3


def test_approximate_mst_all_identical():
    ps = PointSet(points=np.zeros((6, 2)), metric=Metric.L2)
    params = SlcParams.for_point_set(ps, eta=0.5, seed=Seed(9))
    tree, _ = approximate_mst(ps, params)
    assert tree.total_weight() == 0.0
    assert len(tree.edges) == 5


def test_approximate_mst_deterministic():
    ps = uniform_points(200, 2, seed=33)
    params = SlcParams.for_point_set(ps, eta=1.0, seed=Seed(11))
    t1, _ = approximate_mst(ps, params)
    t2, _ = approximate_mst(ps, params)
    assert t1.edges == t2.edges


def test_lower_dominance_unconditional():
    for seed in (0, 1, 2):
        ps = uniform_points(150, 3, seed=40 + seed)
        params = SlcParams.for_point_set(ps, eta=1.0, seed=Seed(seed))
        tree, _ = approximate_mst(ps, params)
        exact = exact_mst(ps)
        wa = tree.sorted_weights()
        we = exact.sorted_weights()
        assert np.all(we <= wa * (1 + 1e-12) + 1e-300)


def test_k_slc_chain_gap_oracle():
    ps = chain_with_gap(12)
    tree = exact_mst(ps)
    clustering = k_slc_from_mst(tree, 2, ps)
    assert clustering.objective == 100.0
    assert clustering.labels[-1] == 1
    assert set(clustering.labels[:-1]) == {0}


def test_k_slc_k_equals_n():
    ps = uniform_points(9, 2, seed=50)
    tree = exact_mst(ps)
    clustering = k_slc_from_mst(tree, 9, ps)
    assert len(set(clustering.labels.tolist())) == 9
    assert clustering.objective == pytest.approx(float(tree.sorted_weights()[0]))


def test_k_slc_matches_exhaustive():
    for seed in range(4):
        ps = uniform_points(8, 2, seed=60 + seed)
        tree = exact_mst(ps)
        got = k_slc_from_mst(tree, 3, ps).objective
        assert got == pytest.approx(exhaustive_slc(ps, 3), abs=1e-12)


def test_k_slc_k1_undefined():
    ps = uniform_points(5, 2, seed=70)
    clustering = k_slc_from_mst(exact_mst(ps), 1, ps)
    assert math.isinf(clustering.objective)
    assert set(clustering.labels.tolist()) == {0}


def test_k_slc_rejects_bad_k():
    ps = uniform_points(5, 2, seed=71)
    tree = exact_mst(ps)
    with pytest.raises(InputError):
        k_slc_from_mst(tree, 6, ps)
    with pytest.raises(InputError):
        k_slc_from_mst(tree, 0, ps)


def test_verify_identical_trees():
    ps = uniform_points(40, 2, seed=80)
    tree = exact_mst(ps)
    report = verify_per_edge_guarantee(tree, tree, 0.5)
    assert report.ok
    assert report.max_ratio == 1.0


def test_verify_per_index_band():
    exact = SpanningTree(n_vertices=4, edges=((0, 1, 1.0), (1, 2, 1.0), (2, 3, 2.0)))
    approx = SpanningTree(n_vertices=4, edges=((0, 1, 1.0), (1, 2, 1.4), (2, 3, 2.0)))
    report = verify_per_edge_guarantee(approx, exact, 0.5)
    assert report.ok
    bad = SpanningTree(n_vertices=4, edges=((0, 1, 1.0), (1, 2, 1.6), (2, 3, 2.0)))
    report2 = verify_per_edge_guarantee(bad, exact, 0.5)
    assert report2.violations == [1]


def test_verify_full_pipeline_small():
    ps = uniform_points(300, 3, seed=90)
    params = SlcParams.for_point_set(ps, eta=0.5, seed=Seed(13))
    tree, _ = approximate_mst(ps, params)
    report = verify_per_edge_guarantee(tree, exact_mst(ps), 0.5)
    assert report.ok
