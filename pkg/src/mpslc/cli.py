"""Command-line entry point: dataset io, normalization, experiment runs.

Reports are serialized with stable key order so identical configurations
produce byte-identical files apart from the timing block. Exit codes:
0 success, 1 verification failure, 2 input error, 3 capacity error.
"""

from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import hardness, oracle
from .core import CapacityError, InputError, Metric, PointSet, Seed, derive_seed
from .hamming import hamming_mst
from .mpc import MpcConfig
from .slc import SlcParams, approximate_mst, k_slc_from_mst, verify_per_edge_guarantee


def load_csv(path: str, metric: Metric = Metric.L2) -> PointSet:
    """Comma-separated numeric rows of uniform width; row order gives ids."""
    rows = []
    width = None
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            parts = text.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise InputError(
                    f"{path}:{lineno}: expected {width} fields, found {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: non-numeric field ({exc})") from exc
    if not rows:
        raise InputError(f"{path}: no data rows")
    return PointSet(points=np.asarray(rows, dtype=np.float64), metric=metric)


def write_csv(points: np.ndarray, path: str) -> None:
    """Full-precision decimal output; reading it back is bit-exact."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in np.atleast_2d(points):
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def write_sparse(vs: list, path: str) -> None:
    """One line per vector: dim;idx:val,idx:val,..."""
    with open(path, "w", encoding="utf-8") as fh:
        for v in vs:
            body = ",".join(f"{i}:{repr(val)}" for i, val in v.entries)
            fh.write(f"{v.dim};{body}\n")


def load_sparse(path: str) -> list:
    from .core import SparsePoint

    out = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                head, _, body = text.partition(";")
                dim = int(head)
                entries = []
                if body:
                    for item in body.split(","):
                        idx, _, val = item.partition(":")
                        entries.append((int(idx), float(val)))
                out.append(SparsePoint(entries=tuple(entries), dim=dim))
            except (ValueError, InputError) as exc:
                raise InputError(f"{path}:{lineno}: bad sparse record ({exc})") from exc
    if not out:
        raise InputError(f"{path}: no data rows")
    return out


def normalize_zscore(ps: PointSet) -> PointSet:
    """Center every dimension and scale to unit variance; zero-variance
    dimensions are centered but left unscaled."""
    if ps.n < 2:
        raise InputError("normalization needs at least two points")
    if ps.metric is Metric.L0:
        raise InputError("z-scoring is undefined for Hamming inputs")
    mean = ps.points.mean(axis=0)
    std = ps.points.std(axis=0)
    scale = np.where(std > 0, std, 1.0)
    return PointSet(points=(ps.points - mean) / scale, metric=ps.metric)


@dataclass
class RunConfig:
    input_path: str
    metric: Metric
    eta: float
    k_list: list
    seed: Seed
    repetitions: int | None = None
    space_s: int | None = None
    normalize: bool = False
    output_path: str | None = None
    curve_path: str | None = None
    timing_repeats: int = 1

    def echo(self) -> dict:
        return {
            "input_path": self.input_path,
            "metric": self.metric.value,
            "eta": self.eta,
            "k_list": list(self.k_list),
            "seed": self.seed.value,
            "repetitions": self.repetitions,
            "space_s": self.space_s,
            "normalize": self.normalize,
            "output_path": self.output_path,
            "curve_path": self.curve_path,
            "timing_repeats": self.timing_repeats,
        }


@dataclass
class Report:
    config: dict
    n: int
    dim: int
    per_k: list
    edge_check: dict | None
    rounds: int
    trace_summary: dict
    timings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "n": self.n,
            "dim": self.dim,
            "per_k": self.per_k,
            "edge_check": self.edge_check,
            "rounds": self.rounds,
            "trace_summary": self.trace_summary,
            "timings": self.timings,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def curve_rows(self) -> list:
        rows = ["k,approx_objective,oracle_objective,ratio"]
        for entry in self.per_k:
            a = entry["approx_objective"]
            o = entry["oracle_objective"]
            r = entry["ratio"]
            fmt = lambda x: "" if x is None or x == "undefined" else repr(float(x))
            rows.append(f"{entry['k']},{fmt(a)},{fmt(o)},{fmt(r)}")
        return rows


def _objective_json(value: float):
    return "undefined" if math.isinf(value) else float(value)


def _mpc_for(ps: PointSet, cfg: RunConfig) -> MpcConfig:
    if cfg.space_s is not None:
        return MpcConfig(space_s=cfg.space_s)
    return MpcConfig.auto(ps.n, ps.dim)


def _build_tree(ps: PointSet, cfg: RunConfig):
    mpc = _mpc_for(ps, cfg)
    if ps.metric is Metric.L0:
        return hamming_mst(ps, mpc)
    params = SlcParams.for_point_set(ps, eta=cfg.eta, seed=cfg.seed,
                                     repetitions=cfg.repetitions, mpc=mpc)
    return approximate_mst(ps, params)


def run_experiment(cfg: RunConfig) -> Report:
    """One end-to-end run: build the tree, extract every requested k, and
    cross-check against the dense oracle whenever it fits."""
    ps = load_csv(cfg.input_path, cfg.metric)
    if cfg.normalize:
        ps = normalize_zscore(ps)
    wall = []
    tree = trace = None
    for _ in range(max(1, cfg.timing_repeats)):
        t0 = time.perf_counter()
        tree, trace = _build_tree(ps, cfg)
        wall.append(time.perf_counter() - t0)
    timings = {"approx_seconds": statistics.median(wall)}
    oracle_tree = None
    if ps.n <= oracle.DENSE_CAP:
        t0 = time.perf_counter()
        oracle_tree = oracle.exact_mst(ps)
        timings["oracle_seconds"] = time.perf_counter() - t0
    per_k = []
    for k in sorted(set(int(k) for k in cfg.k_list)):
        clustering = k_slc_from_mst(tree, k, ps)
        row = {"k": k, "approx_objective": _objective_json(clustering.objective),
               "oracle_objective": None, "ratio": None}
        if oracle_tree is not None:
            exact = k_slc_from_mst(oracle_tree, k, ps)
            row["oracle_objective"] = _objective_json(exact.objective)
            if not math.isinf(clustering.objective) and exact.objective > 0:
                row["ratio"] = clustering.objective / exact.objective
        per_k.append(row)
    edge_check = None
    if oracle_tree is not None:
        report = verify_per_edge_guarantee(tree, oracle_tree, cfg.eta)
        edge_check = {
            "max_ratio": None if math.isinf(report.max_ratio) else report.max_ratio,
            "violations": len(report.violations),
            "within_eta": report.ok,
        }
    summary = {
        "rounds": trace.rounds,
        "max_words": trace.max_words(),
        "machines_peak": max((r.machines_used for r in trace.per_round), default=0),
        "total_messages_words": sum(r.total_messages_words for r in trace.per_round),
    }
    rep = Report(config=cfg.echo(), n=ps.n, dim=ps.dim, per_k=per_k,
                 edge_check=edge_check, rounds=trace.rounds,
                 trace_summary=summary, timings=timings)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(rep.to_json())
    if cfg.curve_path:
        with open(cfg.curve_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(rep.curve_rows()) + "\n")
    return rep


def _parse_k_list(text: str) -> list:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError as exc:
        raise InputError(f"bad k list {text!r}") from exc


def _cmd_run(args) -> int:
    cfg = RunConfig(
        input_path=args.input, metric=Metric.parse(args.metric), eta=args.eta,
        k_list=_parse_k_list(args.k), seed=Seed(args.seed),
        repetitions=args.repetitions, space_s=args.space_s,
        normalize=args.normalize, output_path=args.out, curve_path=args.curve,
        timing_repeats=args.timing_repeats,
    )
    report = run_experiment(cfg)
    if not args.out:
        sys.stdout.write(report.to_json())
    return 0


def _cmd_verify(args) -> int:
    cfg = RunConfig(
        input_path=args.input, metric=Metric.parse(args.metric), eta=args.eta,
        k_list=[2], seed=Seed(args.seed), repetitions=args.repetitions,
        space_s=args.space_s,
    )
    ps = load_csv(cfg.input_path, cfg.metric)
    if ps.n > oracle.DENSE_CAP:
        raise CapacityError("verification needs the dense oracle; input too large")
    tree, _trace = _build_tree(ps, cfg)
    exact = oracle.exact_mst(ps)
    report = verify_per_edge_guarantee(tree, exact, cfg.eta)
    print(f"indices={len(report.pairs)} violations={len(report.violations)} "
          f"max_ratio={report.max_ratio:.6f}")
    return 0 if report.ok else 1


def _cmd_trace_dump(args) -> int:
    cfg = RunConfig(
        input_path=args.input, metric=Metric.parse(args.metric), eta=args.eta,
        k_list=[2], seed=Seed(args.seed), repetitions=args.repetitions,
        space_s=args.space_s,
    )
    ps = load_csv(cfg.input_path, cfg.metric)
    _tree, trace = _build_tree(ps, cfg)
    text = trace.to_json_lines()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_gen_hardness(args) -> int:
    metric = Metric.parse(args.metric)
    n = args.n
    if args.kind == "cycle":
        graph = hardness.GraphInstance.one_cycle(n)
        vectors = hardness.gen_cycle_vectors(graph, xi=args.xi, metric=metric)
    elif args.kind == "twocycles":
        graph = hardness.GraphInstance.two_cycles(n)
        vectors = hardness.gen_cycle_vectors(graph, xi=args.xi, metric=metric)
    elif args.kind == "connectivity":
        graph = (hardness.GraphInstance.two_cycles(n) if args.disconnected
                 else hardness.GraphInstance.one_cycle(n))
        vectors = hardness.gen_edge_vectors(graph, metric=metric)
    elif args.kind == "hamming":
        graph = (hardness.GraphInstance.two_cycles(n) if args.disconnected
                 else hardness.GraphInstance.one_cycle(n))
        ps = hardness.gen_hamming_points(graph)
        write_csv(ps.points, args.out)
        return 0
    else:
        raise InputError(f"unknown kind {args.kind!r}")
    if args.jl_eps is not None:
        if metric is not Metric.L2:
            raise InputError("the projection step applies to L2 instances")
        params = hardness.JlParams.auto(len(vectors), args.jl_eps,
                                        derive_seed(Seed(args.seed), "gen"))
        ps = hardness.jl_project(vectors, params)
        write_csv(ps.points, args.out)
    else:
        write_sparse(vectors, args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mpslc",
                                     description="single-linkage clustering toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", required=True)
        p.add_argument("--metric", default="l2")
        p.add_argument("--eta", type=float, default=0.5)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--repetitions", type=int, default=None)
        p.add_argument("--space-s", type=int, default=None, dest="space_s")

    run_p = sub.add_parser("run", help="build the tree and report objectives")
    common(run_p)
    run_p.add_argument("--k", default="2", help="comma-separated cluster counts")
    run_p.add_argument("--normalize", action="store_true")
    run_p.add_argument("--out", default=None)
    run_p.add_argument("--curve", default=None)
    run_p.add_argument("--timing-repeats", type=int, default=1, dest="timing_repeats")
    run_p.set_defaults(fn=_cmd_run)

    ver_p = sub.add_parser("verify", help="exit 0 iff the per-edge check is clean")
    common(ver_p)
    ver_p.set_defaults(fn=_cmd_verify)

    tr_p = sub.add_parser("trace-dump", help="dump per-round trace as JSON lines")
    common(tr_p)
    tr_p.add_argument("--out", default=None)
    tr_p.set_defaults(fn=_cmd_trace_dump)

    gen_p = sub.add_parser("gen-hardness", help="emit a distance-gap instance")
    gen_p.add_argument("--kind", required=True,
                       choices=["cycle", "twocycles", "connectivity", "hamming"])
    gen_p.add_argument("--n", type=int, required=True)
    gen_p.add_argument("--metric", default="l2")
    gen_p.add_argument("--xi", type=float, default=None)
    gen_p.add_argument("--jl-eps", type=float, default=None, dest="jl_eps")
    gen_p.add_argument("--disconnected", action="store_true")
    gen_p.add_argument("--seed", type=int, default=0)
    gen_p.add_argument("--out", required=True)
    gen_p.set_defaults(fn=_cmd_gen_hardness)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
