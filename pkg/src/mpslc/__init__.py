"""Single-linkage clustering toolkit on a simulated massively-parallel runtime."""

from .core import (
    CapacityError,
    InputError,
    Metric,
    PointSet,
    Seed,
    SparsePoint,
    UnsupportedMetricError,
    derive_seed,
    distance,
    rng_stream,
    sparse_distance,
)
from .mpc import (
    MpcConfig,
    MpcContractError,
    MpcTrace,
    SpanningTree,
    WeightedEdgeList,
    boruvka_mst,
    connected_components,
    distributed_sort,
    run_level,
)
from .partition import (
    CellId,
    HierarchicalPartition,
    PartitionParams,
    cell_id,
    level_diameter,
    sample_partition,
)
from .slc import (
    Clustering,
    SlcParams,
    approximate_mst,
    derive_eps,
    k_slc_from_mst,
    verify_per_edge_guarantee,
)
from .unitstep import (
    ComponentState,
    UnitStepOutput,
    approx_closest_cross_pair,
    build_covering,
    unit_step,
)
from .hamming import (
    AuxiliaryGraph,
    MaskProjection,
    build_auxiliary_graph,
    hamming_k_slc,
    hamming_mst,
    hamming_mst_2d,
)
from .hardness import (
    GraphInstance,
    GraphKind,
    JlParams,
    gen_cycle_vectors,
    gen_edge_vectors,
    gen_hamming_points,
    jl_project,
)

__version__ = "0.1.0"
