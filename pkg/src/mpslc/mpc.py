"""Simulated bulk-synchronous runtime with space and round accounting.

Machines are logical: jobs execute locally but every round records how many
machines the greedy packing used, the peak words on any machine, and the
message volume. Word model: one word holds one number or one id, so an
edge is 3 words, a labeled point is d + 2 words, and a sort item is
len(key) + 1 words.

Job packing follows the rule that a new machine starts only when no
existing machine has at least 2s/3 space available, which caps stored
inputs at 2s/3 per machine and leaves s/3 of working space, and uses at
most 3S/s + 1 machines for S total input words.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import CapacityError, InputError


class MpcContractError(RuntimeError):
    """A simulated run violated its declared space or round contract."""


@dataclass(frozen=True)
class MpcConfig:
    """Per-machine word budget and machine count cap."""

    space_s: int
    alpha_exp: float = 0.25
    max_machines: int | None = None

    def __post_init__(self):
        if self.space_s < 16:
            raise InputError("space_s must be at least 16 words")
        if not 0.0 < self.alpha_exp < 0.5:
            raise InputError("alpha_exp must lie in (0, 0.5)")
        if self.max_machines is not None and self.max_machines < 1:
            raise InputError("max_machines must be >= 1 when bounded")

    @classmethod
    def auto(cls, n_points: int, dim: int, headroom: float = 4.0) -> "MpcConfig":
        """Budget wide enough that a whole-input job fits in s/3 words."""
        need = int(headroom * max(1, n_points) * (dim + 2))
        return cls(space_s=max(1024, need))


@dataclass
class RoundStats:
    machines_used: int
    max_words_on_any_machine: int
    total_messages_words: int
    input_words: int = 0
    kind: str = "round"
    segment: int = 0


@dataclass
class MpcTrace:
    """Per-round execution record; the testable contract of a simulated run."""

    per_round: list = field(default_factory=list)

    @property
    def rounds(self) -> int:
        return len(self.per_round)

    def append(self, stats: RoundStats) -> None:
        self.per_round.append(stats)

    def max_words(self) -> int:
        return max((r.max_words_on_any_machine for r in self.per_round), default=0)

    def add_trace(self, other: "MpcTrace") -> None:
        """Sequential composition; the added rounds get fresh segment ids."""
        offset = 1 + max((r.segment for r in self.per_round), default=-1)
        for r in other.per_round:
            self.per_round.append(
                RoundStats(r.machines_used, r.max_words_on_any_machine,
                           r.total_messages_words, r.input_words, r.kind,
                           r.segment + offset)
            )

    def segments(self):
        """Rounds grouped by (segment, kind), in first-appearance order."""
        groups: dict = {}
        for r in self.per_round:
            groups.setdefault((r.segment, r.kind), []).append(r)
        return groups

    def to_json_lines(self) -> str:
        lines = []
        for i, r in enumerate(self.per_round):
            lines.append(json.dumps({
                "round": i,
                "machines": r.machines_used,
                "max_words": r.max_words_on_any_machine,
                "msg_words": r.total_messages_words,
            }, sort_keys=True))
        return "\n".join(lines) + ("\n" if lines else "")


def merge_parallel(traces: list) -> MpcTrace:
    """Overlay traces that run concurrently: rounds align, machines add up."""
    out = MpcTrace()
    depth = max((t.rounds for t in traces), default=0)
    for i in range(depth):
        live = [t.per_round[i] for t in traces if i < t.rounds]
        out.append(RoundStats(
            machines_used=sum(r.machines_used for r in live),
            max_words_on_any_machine=max(r.max_words_on_any_machine for r in live),
            total_messages_words=sum(r.total_messages_words for r in live),
            input_words=sum(r.input_words for r in live),
            kind=live[0].kind,
        ))
    return out


def round_bound(n_vertices: int) -> int:
    """Contractual round ceiling for Boruvka and connectivity runs."""
    return 2 * math.ceil(math.log2(max(1, n_vertices))) + 2


def _check_machine_cap(trace: MpcTrace, cfg: MpcConfig) -> None:
    if cfg.max_machines is None:
        return
    peak = max((r.machines_used for r in trace.per_round), default=0)
    if peak > cfg.max_machines:
        raise CapacityError(
            f"round needs {peak} machines, cap is {cfg.max_machines}"
        )


@dataclass(frozen=True)
class WeightedEdgeList:
    """Graph edges over vertex ids with nonnegative weights, deduplicated."""

    n_vertices: int
    edges: tuple

    def __post_init__(self):
        if self.n_vertices < 1:
            raise InputError("graph needs at least one vertex")
        seen = set()
        for u, v, w in self.edges:
            if not (0 <= u < v < self.n_vertices):
                raise InputError(f"edge ({u},{v}) out of range or unnormalized")
            if w < 0:
                raise InputError("edge weights must be nonnegative")
            if (u, v) in seen:
                raise InputError(f"duplicate edge ({u},{v})")
            seen.add((u, v))
        object.__setattr__(self, "edges", tuple(self.edges))

    @classmethod
    def build(cls, n_vertices: int, raw_edges) -> "WeightedEdgeList":
        """Normalize to u < v and keep the minimum weight per vertex pair."""
        best = {}
        for u, v, w in raw_edges:
            u, v = int(u), int(v)
            if u == v:
                continue
            if u > v:
                u, v = v, u
            key = (u, v)
            if key not in best or w < best[key]:
                best[key] = float(w)
        edges = tuple((u, v, best[(u, v)]) for u, v in sorted(best))
        return cls(n_vertices=n_vertices, edges=edges)


@dataclass(frozen=True)
class SpanningTree:
    """Acyclic edge set spanning each connected component of its vertex set."""

    n_vertices: int
    edges: tuple

    def __post_init__(self):
        parent = list(range(self.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        norm = []
        for u, v, w in self.edges:
            u, v = (int(u), int(v)) if u < v else (int(v), int(u))
            ru, rv = find(u), find(v)
            if ru == rv:
                raise InputError(f"edge ({u},{v}) closes a cycle")
            parent[ru] = rv
            norm.append((u, v, float(w)))
        norm.sort(key=lambda e: (e[2], e[0], e[1]))
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def n_components(self) -> int:
        return self.n_vertices - len(self.edges)

    def sorted_weights(self) -> np.ndarray:
        return np.asarray([w for _, _, w in self.edges], dtype=np.float64)

    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))


def run_level(jobs, cfg: MpcConfig):
    """Pack and execute one synchronous round of independent jobs.

    `jobs` is a list of (input_words, callable); a job whose working space
    exceeds s/3 is rejected. Returns (outputs in job order, RoundStats).
    """
    s = cfg.space_s
    cap = s // 3
    used: list[int] = []
    peak_job: list[int] = []
    assignment = []
    first_open = 0
    for i, (size, _job) in enumerate(jobs):
        size = int(size)
        if size > cap:
            raise CapacityError(
                f"job {i} needs {size} words of working space, budget allows {cap}"
            )
        while first_open < len(used) and used[first_open] > cap:
            first_open += 1
        if first_open == len(used):
            if cfg.max_machines is not None and len(used) + 1 > cfg.max_machines:
                raise CapacityError(
                    f"packing needs more than {cfg.max_machines} machines"
                )
            used.append(0)
            peak_job.append(0)
        used[first_open] += size
        peak_job[first_open] = max(peak_job[first_open], size)
        assignment.append(first_open)
    total = sum(int(size) for size, _ in jobs)
    machines = len(used)
    if machines > 3 * total / s + 1:
        raise MpcContractError(
            f"greedy packing used {machines} machines for {total} words"
        )
    outputs = [job() for _, job in jobs]
    max_words = max((u + p for u, p in zip(used, peak_job)), default=0)
    stats = RoundStats(machines_used=machines, max_words_on_any_machine=max_words,
                       total_messages_words=total, input_words=total, kind="level")
    return outputs, stats


def _boruvka_phases(n, eu, ev, ew, cfg, kind):
    """Shared Boruvka engine: per-phase minimum cross edges under the total
    order (weight, u, v), merged until components stabilize.

    Returns (tree edges, final labels array, list of per-phase RoundStats).
    """
    s = cfg.space_s
    m = len(eu)
    order = np.lexsort((ev, eu, ew))
    eu, ev, ew = eu[order], ev[order], ew[order]
    chunk_edges = max(1, s // 5)
    n_chunks = max(1, math.ceil(m / chunk_edges)) if m else 1
    chunk_words = 5 * min(m, chunk_edges) if m else 0

    labels = np.arange(n, dtype=np.int64)
    parent: dict = {}

    def find(x: int) -> int:
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(x, x) != x:
            parent[x], x = root, parent[x]
        return root

    tree = []
    stats = []
    guard = math.ceil(math.log2(max(2, n))) + 2
    for _ in range(guard):
        cu = labels[eu]
        cv = labels[ev]
        cross = np.flatnonzero(cu != cv)
        if len(cross) == 0:
            break
        comp_col = np.empty(2 * len(cross), dtype=np.int64)
        comp_col[0::2] = cu[cross]
        comp_col[1::2] = cv[cross]
        row_col = np.repeat(cross, 2)
        _, first = np.unique(comp_col, return_index=True)
        cand_rows = np.unique(row_col[first])
        merged = 0
        for k in cand_rows:
            a = find(int(labels[eu[k]]))
            b = find(int(labels[ev[k]]))
            if a != b:
                lo, hi = (a, b) if a < b else (b, a)
                parent[hi] = lo
                tree.append((int(eu[k]), int(ev[k]), float(ew[k])))
                merged += 1
        uniq, inv = np.unique(labels, return_inverse=True)
        labels = np.fromiter((find(int(x)) for x in uniq), dtype=np.int64,
                             count=len(uniq))[inv]
        cand_words = 3 * len(cand_rows)
        stats.append(RoundStats(machines_used=n_chunks,
                                max_words_on_any_machine=chunk_words,
                                total_messages_words=cand_words,
                                input_words=5 * m, kind=kind))
        merge_machines = max(1, math.ceil(cand_words / max(1, s // 3)))
        stats.append(RoundStats(machines_used=merge_machines,
                                max_words_on_any_machine=min(cand_words, s // 3) if cand_words else 0,
                                total_messages_words=2 * n,
                                input_words=cand_words, kind=kind))
        if merged == 0:
            break
    if np.any(labels[eu] != labels[ev]):
        raise MpcContractError("merging phases exhausted with components left")
    return tree, labels, stats


def _scatter_gather(trace_rounds, n_chunks, chunk_words, msg_words, out_words, cfg, kind):
    s = cfg.space_s
    head = RoundStats(machines_used=n_chunks, max_words_on_any_machine=chunk_words,
                      total_messages_words=msg_words, input_words=msg_words, kind=kind)
    gather_machines = max(1, math.ceil(out_words / max(1, s // 3)))
    tail = RoundStats(machines_used=gather_machines,
                      max_words_on_any_machine=min(out_words, s // 3) if out_words else 0,
                      total_messages_words=out_words, input_words=out_words, kind=kind)
    return [head] + trace_rounds + [tail]


def boruvka_mst(g: WeightedEdgeList, cfg: MpcConfig):
    """Exact minimum spanning forest of g in at most 2*ceil(log2 n)+2 rounds.

    Ties break by (weight, u, v), making the output edge set unique.
    """
    n = g.n_vertices
    m = len(g.edges)
    eu = np.asarray([e[0] for e in g.edges], dtype=np.int64)
    ev = np.asarray([e[1] for e in g.edges], dtype=np.int64)
    ew = np.asarray([e[2] for e in g.edges], dtype=np.float64)
    tree, _labels, phase_stats = _boruvka_phases(n, eu, ev, ew, cfg, "boruvka")
    s = cfg.space_s
    chunk_edges = max(1, s // 5)
    n_chunks = max(1, math.ceil(m / chunk_edges)) if m else 1
    chunk_words = 5 * min(m, chunk_edges) if m else 0
    rounds = _scatter_gather(phase_stats, n_chunks, chunk_words, 3 * m,
                             3 * len(tree), cfg, "boruvka")
    trace = MpcTrace(per_round=rounds)
    if trace.rounds > round_bound(n):
        raise MpcContractError(f"boruvka used {trace.rounds} rounds on {n} vertices")
    if trace.max_words() > s:
        raise MpcContractError("boruvka exceeded the per-machine space budget")
    _check_machine_cap(trace, cfg)
    return SpanningTree(n_vertices=n, edges=tuple(tree)), trace


def connected_components(g: WeightedEdgeList, cfg: MpcConfig):
    """Component labels (minimum member id) in at most 2*ceil(log2 n)+2 rounds."""
    n = g.n_vertices
    m = len(g.edges)
    eu = np.asarray([e[0] for e in g.edges], dtype=np.int64)
    ev = np.asarray([e[1] for e in g.edges], dtype=np.int64)
    ew = np.zeros(m, dtype=np.float64)
    _tree, labels, phase_stats = _boruvka_phases(n, eu, ev, ew, cfg, "connectivity")
    s = cfg.space_s
    chunk_edges = max(1, s // 5)
    n_chunks = max(1, math.ceil(m / chunk_edges)) if m else 1
    chunk_words = 5 * min(m, chunk_edges) if m else 0
    rounds = _scatter_gather(phase_stats, n_chunks, chunk_words, 3 * m, n, cfg,
                             "connectivity")
    trace = MpcTrace(per_round=rounds)
    if trace.rounds > round_bound(n):
        raise MpcContractError(
            f"connectivity used {trace.rounds} rounds on {n} vertices"
        )
    if trace.max_words() > s:
        raise MpcContractError("connectivity exceeded the per-machine space budget")
    _check_machine_cap(trace, cfg)
    return labels, trace


def _item_words(item) -> int:
    key = item[0]
    return (len(key) if isinstance(key, (tuple, list)) else 1) + 1


def distributed_sort(items, cfg: MpcConfig):
    """Stable sort by key in exactly 4 rounds (sample, split, exchange, gather)."""
    s = cfg.space_s
    words = [_item_words(it) for it in items]
    total = sum(words)
    m_machines = max(1, math.ceil(total / max(1, s // 3)))
    if cfg.max_machines is not None:
        m_machines = min(m_machines, cfg.max_machines)
    chunk = math.ceil(total / m_machines) if total else 0
    if chunk > s:
        raise CapacityError("sort input does not fit the machine budget")
    result = sorted(items, key=lambda it: it[0])
    splitter_words = max(0, m_machines - 1) * 2
    rounds = [
        RoundStats(m_machines, chunk, total, total, "sort"),
        RoundStats(m_machines, chunk + splitter_words, m_machines * splitter_words,
                   splitter_words, "sort"),
        RoundStats(m_machines, 2 * chunk, total, total, "sort"),
        RoundStats(m_machines, chunk, total, total, "sort"),
    ]
    trace = MpcTrace(per_round=rounds)
    if trace.rounds > 4:
        raise MpcContractError("sort exceeded 4 rounds")
    if trace.max_words() > s:
        raise MpcContractError("sort exceeded the per-machine space budget")
    _check_machine_cap(trace, cfg)
    return result, trace
