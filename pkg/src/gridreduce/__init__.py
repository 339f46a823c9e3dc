"""gridreduce: cluster-based numerosity reduction for volumetric grid data.

Replaces a large spatio-temporal grid dataset with a small set of
representative points via shared-nearest-neighbor density clustering, with
box-average scaling and k-medoids baselines, a partitioned low-memory mode,
and metrics that quantify the information lost by each reduction.
"""

from .baselines import (
    KMedoids,
    KMedoidsParams,
    ScalingParams,
    kmedoids,
    kmedoids_reduce,
    scale_reduce,
)
from .errors import DataError
from .evaluate import (
    MethodConfig,
    ReductionReport,
    compare_methods,
    coverage_radius,
    evaluate_reduction,
    mean_nn_error,
    reduction_ratio,
    run_reduction,
)
from .grid import (
    NULL_SENTINEL,
    Dataset,
    GridSpec,
    PointRecord,
    ReducedDataset,
    ReductionProvenance,
    filter_null,
    normalize_point,
    normalized_features,
)
from .ingest import (
    SyntheticSpec,
    export_brick,
    export_csv,
    generate_synthetic,
    load_brick,
    load_csv,
    separated_blobs,
)
from .neighbors import NeighborList, knn_brute, knn_indexed
from .partition import PartitionPlan, partitioned_reduce, plan_partitions
from .snn import (
    NOISE,
    ClusterAssignment,
    SharedNeighborClustering,
    SnnGraph,
    SnnParams,
    build_snn_graph,
    estimate_params,
    select_specific_cores,
    snn_dbscan,
    snn_reduce,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "DataError",
    "NULL_SENTINEL",
    "GridSpec",
    "PointRecord",
    "Dataset",
    "ReducedDataset",
    "ReductionProvenance",
    "filter_null",
    "normalize_point",
    "normalized_features",
    "SyntheticSpec",
    "load_brick",
    "export_brick",
    "load_csv",
    "export_csv",
    "generate_synthetic",
    "separated_blobs",
    "NeighborList",
    "knn_brute",
    "knn_indexed",
    "NOISE",
    "SnnGraph",
    "SnnParams",
    "ClusterAssignment",
    "build_snn_graph",
    "estimate_params",
    "snn_dbscan",
    "select_specific_cores",
    "snn_reduce",
    "SharedNeighborClustering",
    "ScalingParams",
    "scale_reduce",
    "KMedoidsParams",
    "kmedoids",
    "kmedoids_reduce",
    "KMedoids",
    "PartitionPlan",
    "plan_partitions",
    "partitioned_reduce",
    "MethodConfig",
    "ReductionReport",
    "reduction_ratio",
    "coverage_radius",
    "mean_nn_error",
    "evaluate_reduction",
    "compare_methods",
    "run_reduction",
]
