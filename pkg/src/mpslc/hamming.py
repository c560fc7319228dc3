"""Exact Hamming MST and clustering for small dimension.

For every subset of coordinates (a d-bit mask), sorting by the projected
coordinates links consecutive equal projections with an edge whose weight
is the number of unselected coordinates. The resulting auxiliary graph has
at most 2^d * n edges and preserves, for every threshold t, the connected
components of the Hamming-distance-<=t graph; augmenting a spanning forest
by increasing weight class therefore reproduces an exact Hamming MST.
Duplicate points link at weight zero through the all-ones mask.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InputError, Metric, PointSet
from .mpc import (
    MpcConfig,
    SpanningTree,
    WeightedEdgeList,
    connected_components,
    distributed_sort,
    merge_parallel,
)
from .slc import Clustering, k_slc_from_mst

MAX_DIM = 20


@dataclass(frozen=True)
class MaskProjection:
    """One coordinate subset: selected columns and the weight its links get."""

    mask: int
    dim: int

    @property
    def columns(self) -> tuple:
        return tuple(j for j in range(self.dim) if (self.mask >> j) & 1)

    @property
    def weight_if_linked(self) -> int:
        return self.dim - len(self.columns)


@dataclass(frozen=True)
class AuxiliaryGraph:
    """Mask-derived edges with integer weights (0 only between duplicates)."""

    n_vertices: int
    edges: tuple

    def __post_init__(self):
        for _u, _v, w in self.edges:
            if not (0 <= w <= MAX_DIM and w == int(w)):
                raise InputError("auxiliary weights must be small integers")


def _validated_int_points(ps: PointSet) -> np.ndarray:
    if ps.metric is not Metric.L0:
        raise InputError("Hamming operations require an L0-tagged point set")
    if ps.dim > MAX_DIM:
        raise InputError(f"dimension capped at {MAX_DIM} (2^d edge groups)")
    pts = ps.points
    if not np.all(pts == np.round(pts)):
        raise InputError("Hamming inputs must have integer coordinates")
    return pts.astype(np.int64)


def build_auxiliary_graph(ps: PointSet, cfg: MpcConfig):
    """All mask-projected sort links, one distributed sort per mask in parallel."""
    pts = _validated_int_points(ps)
    n, d = pts.shape
    raw = []
    traces = []
    for mask in range(1 << d):
        proj = MaskProjection(mask=mask, dim=d)
        cols = proj.columns
        items = [(tuple(int(c) for c in pts[i, cols]) , i) for i in range(n)]
        ordered, tr = distributed_sort(items, cfg)
        traces.append(tr)
        for a, b in zip(ordered, ordered[1:]):
            if a[0] == b[0]:
                raw.append((a[1], b[1], proj.weight_if_linked))
    best = {}
    for u, v, w in raw:
        key = (u, v) if u < v else (v, u)
        if key not in best or w < best[key]:
            best[key] = w
    edges = tuple((u, v, best[(u, v)]) for u, v in sorted(best))
    return AuxiliaryGraph(n_vertices=n, edges=edges), merge_parallel(traces)


class _Forest:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        root = x
        while self.parent.get(root, root) != root:
            root = self.parent[root]
        while self.parent.get(x, x) != x:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        lo, hi = (ra, rb) if ra < rb else (rb, ra)
        self.parent[hi] = lo
        return True


def hamming_mst(ps: PointSet, cfg: MpcConfig):
    """Exact Hamming MST: mask sorts, then weight classes 0..d augment the
    forest, each class contracted through a distributed connectivity pass."""
    pts = _validated_int_points(ps)
    n, d = pts.shape
    aux, trace = build_auxiliary_graph(ps, cfg)
    labels = np.arange(n, dtype=np.int64)
    tree = []
    for t in range(0, d + 1):
        cand = sorted((u, v) for u, v, w in aux.edges if w == t)
        live = [(u, v) for u, v in cand if labels[u] != labels[v]]
        if not live:
            continue
        uf = _Forest()
        for u, v in live:
            if uf.union(int(labels[u]), int(labels[v])):
                tree.append((u, v, float(t)))
        uniq = np.unique(labels)
        index = {int(l): i for i, l in enumerate(uniq)}
        contracted = WeightedEdgeList.build(
            len(uniq),
            ((index[int(labels[u])], index[int(labels[v])], 0.0) for u, v in live),
        )
        cc_labels, tr = connected_components(contracted, cfg)
        trace.add_trace(tr)
        labels = uniq[cc_labels[np.searchsorted(uniq, labels)]]
    return SpanningTree(n_vertices=n, edges=tuple(tree)), trace


def hamming_mst_2d(ps: PointSet, cfg: MpcConfig):
    """Fast path for d = 2: the optimum weight is n + c - 2 where c counts
    components of the share-a-coordinate subgraph over distinct points.

    Returns (mst_weight, component_count); duplicates cost zero and drop out.
    """
    pts = _validated_int_points(ps)
    if pts.shape[1] != 2:
        raise InputError("the 2-d fast path requires exactly two coordinates")
    uniq = np.unique(pts, axis=0)
    n = len(uniq)
    if n == 1:
        return 0, 1
    links = []
    for axes in ((0, 1), (1, 0)):
        items = [((int(uniq[i, axes[0]]), int(uniq[i, axes[1]])), i)
                 for i in range(n)]
        ordered, _tr = distributed_sort(items, cfg)
        for a, b in zip(ordered, ordered[1:]):
            if a[0][0] == b[0][0]:
                links.append((a[1], b[1], 0.0))
    graph = WeightedEdgeList.build(n, links)
    cc_labels, _tr = connected_components(graph, cfg)
    c = len(np.unique(cc_labels))
    return n + c - 2, c


def hamming_k_slc(ps: PointSet, k: int, cfg: MpcConfig) -> Clustering:
    """Exact k-clustering from the exact Hamming MST."""
    tree, _trace = hamming_mst(ps, cfg)
    return k_slc_from_mst(tree, k, ps)
