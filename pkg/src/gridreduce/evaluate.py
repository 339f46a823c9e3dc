"""Reduction quality metrics and multi-method comparison.

All distances are measured in the same normalized feature space the
reductions themselves use, with the original dataset's attribute ranges as
the frame, so the numbers quantify exactly the information the methods try
to preserve. Null points are not reconstructable and are excluded.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .baselines import KMedoidsParams, ScalingParams, kmedoids_reduce, scale_reduce
from .grid import Dataset, ReducedDataset, filter_null, normalized_features
from .partition import plan_partitions, partitioned_reduce
from .snn import SnnParams, snn_reduce

__all__ = [
    "ReductionReport",
    "MethodConfig",
    "reduction_ratio",
    "representation_distances",
    "coverage_radius",
    "mean_nn_error",
    "evaluate_reduction",
    "compare_methods",
]

_POINT_CHUNK = 2048

REPORT_FIELDS = (
    "method",
    "reduction_ratio",
    "coverage_radius",
    "mean_nn_error",
    "cluster_count",
    "core_fraction",
    "noise_fraction",
    "runtime_ms",
)


@dataclass(frozen=True)
class ReductionReport:
    """One evaluated reduction. error is set (and the metrics zeroed) when
    the method failed instead of producing representatives."""

    method: str
    reduction_ratio: float = 0.0
    coverage_radius: float = 0.0
    mean_nn_error: float = 0.0
    cluster_count: int = 0
    core_fraction: float = 0.0
    noise_fraction: float = 0.0
    runtime_ms: int = 0
    error: str | None = None

    def __post_init__(self):
        if self.error is not None:
            return
        if not 0.0 < self.reduction_ratio <= 1.0:
            raise ValueError(f"reduction_ratio must be in (0, 1], got {self.reduction_ratio}")
        if self.coverage_radius < 0 or self.mean_nn_error < 0:
            raise ValueError("distances must be non-negative")
        if self.mean_nn_error > self.coverage_radius * (1.0 + 1e-12):
            raise ValueError(
                f"mean_nn_error {self.mean_nn_error} exceeds "
                f"coverage_radius {self.coverage_radius}"
            )
        for name in ("core_fraction", "noise_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


def reduction_ratio(r: ReducedDataset) -> float:
    """Representative count over non-null source count."""
    if r.provenance.nonnull_count <= 0:
        raise ValueError("provenance records no non-null source points")
    return r.n_representatives / r.provenance.nonnull_count


def representation_distances(d: Dataset, rep_idx, rep_attrs, weights=None) -> np.ndarray:
    """Distance from every non-null point of d to its nearest representative.

    Representatives are normalized in d's frame (same dims, same attribute
    ranges). Computed with the plain elementwise formula so results agree
    bitwise with a quadratic scan.
    """
    f = filter_null(d)
    if f.n_points < 1:
        raise ValueError("dataset has no non-null points")
    reps = normalized_features(d.spec, f.attr_ranges, rep_idx, rep_attrs, weights=weights)
    if reps.shape[0] < 1:
        raise ValueError("empty representative set")
    points = f.features(weights=weights)
    out = np.empty(points.shape[0], dtype=np.float64)
    for start in range(0, points.shape[0], _POINT_CHUNK):
        chunk = points[start:start + _POINT_CHUNK]
        diff = chunk[:, None, :] - reps[None, :, :]
        dmat = np.sqrt((diff * diff).sum(axis=-1))
        out[start:start + chunk.shape[0]] = dmat.min(axis=1)
    return out


def coverage_radius(d: Dataset, r: ReducedDataset, weights=None) -> float:
    """Largest distance from any non-null point to its nearest representative."""
    return float(representation_distances(d, r.idx, r.attrs, weights=weights).max())


def mean_nn_error(d: Dataset, r: ReducedDataset, weights=None) -> float:
    """Mean distance from the non-null points to their nearest representative."""
    return float(representation_distances(d, r.idx, r.attrs, weights=weights).mean())


def evaluate_reduction(
    d: Dataset, r: ReducedDataset, runtime_ms: int = 0, method: str | None = None
) -> ReductionReport:
    """Metrics of one reduction against its source dataset.

    Cluster/role statistics come from the reduction's provenance; methods
    without role semantics report zero fractions.
    """
    dists = representation_distances(d, r.idx, r.attrs)
    nonnull = r.provenance.nonnull_count
    params = r.provenance.params
    return ReductionReport(
        method=method or r.provenance.method,
        reduction_ratio=reduction_ratio(r),
        coverage_radius=float(dists.max()),
        mean_nn_error=float(dists.mean()),
        cluster_count=int(params.get("cluster_count", 0)),
        core_fraction=float(params.get("core_count", 0)) / nonnull,
        noise_fraction=float(params.get("noise_count", 0)) / nonnull,
        runtime_ms=runtime_ms,
    )


@dataclass(frozen=True)
class MethodConfig:
    """One reduction to run: method name plus its keyword options.

    snn options: k, eps, min_pts, eps_percentile, core_fraction, mutual,
    n_parts, axis, workers. scaling options: divisions or edge. kmedoids
    options: n_clusters, per_cluster, max_swap_iters, sample_size, seed.
    """

    method: str
    options: Mapping[str, Any] = field(default_factory=dict)


def run_reduction(d: Dataset, config: MethodConfig) -> ReducedDataset:
    """Dispatch one MethodConfig against a dataset."""
    opts = dict(config.options)
    if config.method == "snn":
        k = opts.pop("k", 20)
        n_parts = opts.pop("n_parts", 1)
        axis = opts.pop("axis", "auto")
        eps = opts.pop("eps", None)
        min_pts = opts.pop("min_pts", None)
        params = None
        if eps is not None and min_pts is not None:
            params = SnnParams(k=k, eps=eps, min_pts=min_pts)
        elif eps is not None or min_pts is not None:
            raise ValueError("snn overrides need both eps and min_pts")
        if n_parts > 1:
            plan = plan_partitions(d, n_parts, axis)
            return partitioned_reduce(d, plan, k, params, **opts)
        reduced, _ = snn_reduce(d, k, params, **opts)
        return reduced
    if config.method == "scaling":
        if "edge" in opts:
            scaling = ScalingParams.from_edge(d.spec.dims, opts["edge"])
        else:
            scaling = ScalingParams(tuple(opts["divisions"]))
        return scale_reduce(d, scaling)
    if config.method == "kmedoids":
        return kmedoids_reduce(d, KMedoidsParams(**opts))
    raise ValueError(f"unknown reduction method {config.method!r}")


def compare_methods(d: Dataset, configs) -> list[ReductionReport]:
    """Run several reductions on the same dataset, one report per config.

    A failing config yields a report row carrying the error message; the
    remaining configs still run. Rows keep the input order.
    """
    configs = list(configs)
    if not configs:
        raise ValueError("need at least one method config")
    source = filter_null(d)
    reports = []
    for config in configs:
        start = time.perf_counter()
        try:
            reduced = run_reduction(source, config)
            elapsed = int((time.perf_counter() - start) * 1000)
            reports.append(evaluate_reduction(source, reduced, runtime_ms=elapsed))
        except Exception as exc:  # per-row isolation is the contract
            reports.append(ReductionReport(method=config.method, error=str(exc)))
    return reports
