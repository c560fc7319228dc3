"""Pipeline orchestration: repeated partitions feed per-cell merge steps,
their union of tree edges is finished by exact Boruvka, and clusterings
come from deleting the longest tree edges.

Every repetition samples a fresh random shift, runs the merge step level
by level through the simulated runtime, and contributes one forest; the
root cell runs unbounded so each forest spans. Edge weights are true
metric distances between endpoints, which makes the per-index comparison
against an exact tree sound.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import partial

import numpy as np

from .core import (
    InputError,
    PointSet,
    Seed,
    UnsupportedMetricError,
    Metric,
    derive_seed,
)
from .mpc import (
    MpcConfig,
    MpcContractError,
    MpcTrace,
    RoundStats,
    SpanningTree,
    WeightedEdgeList,
    boruvka_mst,
    run_level,
)
from .partition import (
    PartitionParams,
    base_cell_coords,
    coords_at_level,
    level_diameter,
    sample_partition,
)
from .unitstep import _unit_step_arrays


def derive_eps(eta: float, levels: int, b: float, c1: float, c2: float) -> float:
    """Merge-step accuracy from the target approximation factor:
    eps = min(eta / (6 c1 L b), eta / (3 c2))."""
    if min(eta, levels, b, c1, c2) <= 0:
        raise InputError("all accuracy parameters must be positive")
    if eta > 3:
        warnings.warn("per-edge guarantee is only stated for eta <= 3",
                      stacklevel=2)
    return min(eta / (6.0 * c1 * levels * b), eta / (3.0 * c2))


@dataclass(frozen=True)
class SlcParams:
    """Everything one pipeline run depends on, fully determined by the seed."""

    eta: float
    repetitions: int
    c1: float
    c2: float
    eps: float
    partition: PartitionParams
    mpc: MpcConfig
    seed: Seed

    def __post_init__(self):
        if self.repetitions < 1:
            raise InputError("repetitions must be >= 1")
        want = derive_eps(self.eta, self.partition.levels, self.partition.b_cut,
                          self.c1, self.c2)
        if not math.isclose(self.eps, want, rel_tol=1e-12):
            raise InputError("eps inconsistent with eta, levels, b_cut, c1, c2")

    @classmethod
    def for_point_set(
        cls,
        ps: PointSet,
        eta: float,
        seed: Seed,
        repetitions: int | None = None,
        mpc: MpcConfig | None = None,
        alpha_grid: float = 2.0,
        levels: int | None = None,
        c1: float = 1.0,
        c2: float = 1.0,
        rep_multiplier: float = 1.0,
    ) -> "SlcParams":
        part = PartitionParams.for_point_set(ps, alpha_grid=alpha_grid, levels=levels)
        eps = derive_eps(eta, part.levels, part.b_cut, c1, c2)
        if repetitions is None:
            repetitions = max(1, math.ceil(rep_multiplier * math.log2(max(2, ps.n))))
        if mpc is None:
            mpc = MpcConfig.auto(ps.n, ps.dim)
        return cls(eta=eta, repetitions=int(repetitions), c1=c1, c2=c2, eps=eps,
                   partition=part, mpc=mpc, seed=seed)


@dataclass
class Clustering:
    """k clusters as a label per point plus the split objective."""

    k: int
    labels: np.ndarray
    objective: float


def _degenerate_tree(n: int) -> SpanningTree:
    return SpanningTree(n_vertices=n, edges=tuple((0, i, 0.0) for i in range(1, n)))


def _one_repetition(ps: PointSet, params: SlcParams, rep: int, trace: MpcTrace) -> list:
    """Run one partition sample through all levels; returns its forest edges."""
    n, d = ps.n, ps.dim
    seed = derive_seed(params.seed, f"repetition-{rep}")
    part = sample_partition(ps, params.partition, seed)
    s = params.mpc.space_s
    setup_words = n * (d + 2)
    trace.append(RoundStats(
        machines_used=max(1, math.ceil(setup_words / max(1, s // 3))),
        max_words_on_any_machine=min(setup_words, s // 3),
        total_messages_words=setup_words, input_words=setup_words,
        kind="partition"))
    base = base_cell_coords(part, ps.points)
    reps = np.arange(n, dtype=np.int64)
    labels = np.arange(n, dtype=np.int64)
    forest = []
    levels = params.partition.levels
    for level in range(levels + 1):
        if level == levels:
            level_diam = math.inf
        else:
            level_diam = level_diameter(params.partition, level,
                                        params.partition.bbox_side)
        coords = coords_at_level(part, base[reps], level)
        _, inv = np.unique(coords, axis=0, return_inverse=True)
        order = np.argsort(inv, kind="stable")
        counts = np.bincount(inv)
        starts = np.concatenate(([0], np.cumsum(counts)))
        jobs = []
        for g in range(len(counts)):
            members = order[starts[g]: starts[g + 1]]
            rep_ids = reps[members]
            sub_labels = labels[members]
            jobs.append((len(rep_ids) * (d + 2),
                         partial(_unit_step_arrays, rep_ids, sub_labels,
                                 level_diam, params.eps, ps)))
        outputs, stats = run_level(jobs, params.mpc)
        trace.append(stats)
        next_reps = []
        next_labels = []
        for cover, cover_labels, edges in outputs:
            forest.extend(edges)
            next_reps.append(np.asarray(cover, dtype=np.int64))
            next_labels.append(cover_labels)
        reps = np.concatenate(next_reps)
        labels = np.concatenate(next_labels)
        resort = np.argsort(reps)
        reps, labels = reps[resort], labels[resort]
    if len(np.unique(labels)) != 1:
        raise MpcContractError("repetition finished with a disconnected forest")
    return forest


def approximate_mst(ps: PointSet, params: SlcParams):
    """Collected forests from every repetition, finished by exact Boruvka.

    The result spans all points; its trace concatenates the per-level
    rounds of every repetition and the final Boruvka rounds.
    """
    if ps.metric is Metric.L0:
        raise UnsupportedMetricError(
            "Hamming inputs take the exact path; see the hamming module"
        )
    trace = MpcTrace()
    n = ps.n
    if n == 1:
        return SpanningTree(n_vertices=1, edges=()), trace
    if params.partition.bbox_side == 0.0:
        return _degenerate_tree(n), trace
    union = {}
    for rep in range(params.repetitions):
        forest = _one_repetition(ps, params, rep, trace)
        if len(forest) > n - 1:
            raise MpcContractError("a repetition emitted more than a forest")
        for u, v, w in forest:
            key = (u, v) if u < v else (v, u)
            if key not in union or w < union[key]:
                union[key] = w
    if len(union) > params.repetitions * (n - 1):
        raise MpcContractError("sparsifier exceeded repetitions * (n - 1) edges")
    graph = WeightedEdgeList.build(n, ((u, v, w) for (u, v), w in union.items()))
    tree, btrace = boruvka_mst(graph, params.mpc)
    trace.add_trace(btrace)
    if tree.n_components != 1:
        raise MpcContractError("edge union does not span the input")
    return tree, trace


def k_slc_from_mst(tree: SpanningTree, k: int, ps: PointSet) -> Clustering:
    """Clusters from deleting the k-1 longest tree edges (ties broken by
    (weight, u, v) descending); objective is the smallest deleted weight,
    reported as +inf for k = 1 where no split exists."""
    n = tree.n_vertices
    if ps.n != n:
        raise InputError("tree and point set disagree on n")
    if tree.n_components != 1:
        raise InputError("tree must span the point set")
    if not 1 <= k <= n:
        raise InputError(f"k must lie in [1, {n}]")
    edges = list(tree.edges)
    keep, removed = edges[: n - k], edges[n - k:]
    objective = math.inf if k == 1 else float(removed[0][2])
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, _w in keep:
        parent[find(u)] = find(v)
    roots = [find(i) for i in range(n)]
    relabel = {}
    for r in roots:
        if r not in relabel:
            relabel[r] = len(relabel)
    labels = np.asarray([relabel[r] for r in roots], dtype=np.int64)
    return Clustering(k=k, labels=labels, objective=objective)


@dataclass
class EdgeReport:
    """Per-sorted-index comparison of an approximate tree against an exact one."""

    pairs: list
    violations: list
    max_ratio: float

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_per_edge_guarantee(approx: SpanningTree, exact: SpanningTree,
                              eta: float) -> EdgeReport:
    """Check exact_i <= approx_i <= (1+eta) * exact_i for every sorted index."""
    if approx.n_vertices != exact.n_vertices or len(approx.edges) != len(exact.edges):
        raise InputError("trees must span the same point set")
    wa = approx.sorted_weights()
    we = exact.sorted_weights()
    slack = 1e-12
    pairs = []
    violations = []
    max_ratio = 1.0
    for i, (e, a) in enumerate(zip(we, wa)):
        pairs.append((float(e), float(a)))
        lower_ok = e <= a * (1 + slack) + 1e-300
        upper_ok = a <= (1 + eta) * e * (1 + slack)
        if not (lower_ok and upper_ok):
            violations.append(i)
        if e > 0:
            max_ratio = max(max_ratio, float(a / e))
        elif a > 0:
            max_ratio = math.inf
    return EdgeReport(pairs=pairs, violations=violations, max_ratio=max_ratio)
