import json

import numpy as np
import pytest

from mpslc.core import CapacityError, InputError
from mpslc.mpc import (
    MpcConfig,
    MpcTrace,
    SpanningTree,
    WeightedEdgeList,
    boruvka_mst,
    connected_components,
    distributed_sort,
    merge_parallel,
    round_bound,
    run_level,
)
from mpslc.oracle import kruskal_edges


def _noop(value=0):
    return lambda: value


def test_run_level_one_small_job():
    cfg = MpcConfig(space_s=120)
    outputs, stats = run_level([(30, _noop(7))], cfg)
    assert outputs == [7]
    assert stats.machines_used == 1
    assert stats.max_words_on_any_machine <= cfg.space_s


def test_run_level_six_third_size_jobs():
    s = 300
    cfg = MpcConfig(space_s=s)
    jobs = [(s // 3, _noop(i)) for i in range(6)]
    outputs, stats = run_level(jobs, cfg)
    assert outputs == list(range(6))
    assert stats.machines_used <= 3 * (2 * s) / s + 1
    assert stats.machines_used == 3
    assert stats.max_words_on_any_machine <= s


def test_run_level_rejects_oversized_job():
    cfg = MpcConfig(space_s=90)
    with pytest.raises(CapacityError):
        run_level([(31, _noop())], cfg)


def test_run_level_replay_deterministic():
    rng = np.random.default_rng(0)
    sizes = rng.integers(1, 40, size=100)
    cfg = MpcConfig(space_s=128)
    jobs = [(int(sz), _noop(int(sz))) for sz in sizes]
    out1, st1 = run_level(jobs, cfg)
    out2, st2 = run_level(jobs, cfg)
    assert out1 == out2
    assert st1 == st2


def test_run_level_machine_cap():
    cfg = MpcConfig(space_s=90, max_machines=1)
    jobs = [(30, _noop())] * 9
    with pytest.raises(CapacityError):
        run_level(jobs, cfg)


def test_run_level_machine_bound_formula():
    rng = np.random.default_rng(1)
    cfg = MpcConfig(space_s=300)
    for _ in range(20):
        jobs = [(int(sz), _noop()) for sz in rng.integers(1, 100, size=30)]
        _, stats = run_level(jobs, cfg)
        assert stats.machines_used <= 3 * stats.input_words / cfg.space_s + 1


def test_edge_list_build_dedups_min():
    g = WeightedEdgeList.build(3, [(1, 0, 5.0), (0, 1, 2.0), (1, 2, 1.0)])
    assert g.edges == ((0, 1, 2.0), (1, 2, 1.0))


def test_edge_list_validation():
    with pytest.raises(InputError):
        WeightedEdgeList(n_vertices=2, edges=((0, 0, 1.0),))
    with pytest.raises(InputError):
        WeightedEdgeList(n_vertices=2, edges=((0, 1, -1.0),))


def test_spanning_tree_rejects_cycles():
    with pytest.raises(InputError):
        SpanningTree(n_vertices=3, edges=((0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)))


def test_boruvka_path_graph():
    g = WeightedEdgeList.build(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    tree, trace = boruvka_mst(g, MpcConfig(space_s=256))
    assert set((u, v) for u, v, _ in tree.edges) == {(0, 1), (1, 2), (2, 3)}
    assert trace.rounds <= round_bound(4)


def test_boruvka_triangle_cycle_property():
    g = WeightedEdgeList.build(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)])
    tree, _ = boruvka_mst(g, MpcConfig(space_s=256))
    assert sorted(w for _, _, w in tree.edges) == [1.0, 2.0]


def test_boruvka_matches_kruskal_on_random_graph():
    rng = np.random.default_rng(3)
    n = 500
    edges = []
    seen = set()
    for _ in range(2500):
        u, v = sorted(rng.integers(0, n, size=2).tolist())
        if u == v or (u, v) in seen:
            continue
        seen.add((u, v))
        edges.append((u, v, float(rng.uniform())))
    g = WeightedEdgeList.build(n, edges)
    cfg = MpcConfig(space_s=4096)
    tree, trace = boruvka_mst(g, cfg)
    want = kruskal_edges(n, g.edges)
    assert sorted(tree.edges) == sorted(want)
    assert trace.rounds <= round_bound(n)
    assert trace.max_words() <= cfg.space_s


def test_boruvka_equal_weights_no_cycle():
    g = WeightedEdgeList.build(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0),
                                   (0, 3, 1.0), (0, 2, 1.0), (1, 3, 1.0)])
    tree, _ = boruvka_mst(g, MpcConfig(space_s=256))
    assert len(tree.edges) == 3
    assert sorted(tree.edges) == sorted(kruskal_edges(4, g.edges))


def test_boruvka_disconnected_forest():
    g = WeightedEdgeList.build(5, [(0, 1, 1.0), (2, 3, 1.0)])
    tree, _ = boruvka_mst(g, MpcConfig(space_s=256))
    assert tree.n_components == 3


def test_connected_components_two_triangles():
    g = WeightedEdgeList.build(6, [(0, 1, 0), (1, 2, 0), (0, 2, 0),
                                   (3, 4, 0), (4, 5, 0), (3, 5, 0)])
    labels, trace = connected_components(g, MpcConfig(space_s=256))
    assert len(set(labels.tolist())) == 2
    assert labels[0] == labels[1] == labels[2] == 0
    assert labels[3] == labels[4] == labels[5] == 3
    assert trace.rounds <= round_bound(6)


def test_connected_components_cycle():
    n = 64
    g = WeightedEdgeList.build(n, [(i, (i + 1) % n, 0) for i in range(n)])
    labels, trace = connected_components(g, MpcConfig(space_s=2048))
    assert set(labels.tolist()) == {0}
    assert trace.rounds <= round_bound(n)


def test_connected_components_random_vs_union_find():
    rng = np.random.default_rng(4)
    n = 300
    edges = {(min(u, v), max(u, v)) for u, v in rng.integers(0, n, size=(200, 2))
             if u != v}
    g = WeightedEdgeList.build(n, [(u, v, 0) for u, v in edges])
    labels, _ = connected_components(g, MpcConfig(space_s=4096))
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        parent[find(u)] = find(v)
    want = {}
    for i in range(n):
        want.setdefault(find(i), []).append(i)
    for block in want.values():
        assert len({labels[i] for i in block}) == 1
        assert labels[block[0]] == min(block)


def test_sort_stable_and_correct():
    cfg = MpcConfig(space_s=256)
    items = [(5, "a"), (1, "b"), (5, "c"), (0, "d")]
    out, trace = distributed_sort(items, cfg)
    assert out == [(0, "d"), (1, "b"), (5, "a"), (5, "c")]
    assert trace.rounds <= 4
    already = [(0, "x"), (0, "y"), (1, "z")]
    out2, _ = distributed_sort(already, cfg)
    assert out2 == already
    backwards = [(k, None) for k in range(9, -1, -1)]
    out3, _ = distributed_sort(backwards, cfg)
    assert [k for k, _ in out3] == list(range(10))


def test_sort_large_random_matches_oracle():
    rng = np.random.default_rng(5)
    keys = rng.integers(0, 10**6, size=100_000).tolist()
    items = [(k, i) for i, k in enumerate(keys)]
    cfg = MpcConfig(space_s=65536)
    out, trace = distributed_sort(items, cfg)
    assert out == sorted(items, key=lambda kv: kv[0])
    assert trace.rounds <= 4
    assert trace.max_words() <= cfg.space_s


def test_trace_json_lines_schema():
    g = WeightedEdgeList.build(3, [(0, 1, 1.0), (1, 2, 2.0)])
    _, trace = boruvka_mst(g, MpcConfig(space_s=256))
    lines = trace.to_json_lines().strip().splitlines()
    assert len(lines) == trace.rounds
    for i, line in enumerate(lines):
        obj = json.loads(line)
        assert set(obj) == {"round", "machines", "max_words", "msg_words"}
        assert obj["round"] == i


def test_merge_parallel_overlays():
    t1 = MpcTrace()
    t2 = MpcTrace()
    _, s1 = run_level([(10, _noop())], MpcConfig(space_s=96))
    t1.append(s1)
    t2.append(s1)
    t2.append(s1)
    merged = merge_parallel([t1, t2])
    assert merged.rounds == 2
    assert merged.per_round[0].machines_used == 2
    assert merged.per_round[1].machines_used == 1


def test_mpc_config_validation():
    with pytest.raises(InputError):
        MpcConfig(space_s=3)
    with pytest.raises(InputError):
        MpcConfig(space_s=64, alpha_exp=0.7)
