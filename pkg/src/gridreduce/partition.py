"""Memory-constrained reduction: split into spatial slabs, reduce each
slab independently, merge the representatives.

Slabs are contiguous runs of the non-null points sorted by one grid
coordinate (ties by id), sized as evenly as possible. Normalization ranges
are computed once on the whole dataset so every slab clusters in the same
feature space. Slabs are processed one at a time; only the current slab's
neighbor and graph structures are ever resident.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .grid import Dataset, ReducedDataset, ReductionProvenance
from .snn import SnnParams, snn_reduce

__all__ = ["PartitionPlan", "plan_partitions", "partitioned_reduce"]

_AXES = ("x", "y", "z")


@dataclass(frozen=True)
class PartitionPlan:
    """Disjoint, exhaustive slabs of the non-null points.

    slab_ids holds each slab's point ids (ascending); boundaries holds the
    grid coordinate at which each of the n_parts-1 cuts falls.
    """

    n_parts: int
    axis: str
    slab_ids: tuple[np.ndarray, ...]
    boundaries: tuple[int, ...]

    def __post_init__(self):
        if self.axis not in _AXES:
            raise ValueError(f"axis must be one of {_AXES}, got {self.axis!r}")
        if self.n_parts != len(self.slab_ids):
            raise ValueError("n_parts disagrees with the slab list")
        if any(s.size == 0 for s in self.slab_ids):
            raise ValueError("empty slab")

    @property
    def slab_sizes(self) -> tuple[int, ...]:
        return tuple(int(s.size) for s in self.slab_ids)


def plan_partitions(d: Dataset, n_parts: int, axis: str = "auto") -> PartitionPlan:
    """Equal-frequency slabs of the non-null points along one grid axis.

    axis="auto" picks the axis with the largest grid extent (ties resolved
    x before y before z). Slab point counts differ by at most one, with the
    larger slabs leading.
    """
    if n_parts < 1:
        raise ValueError(f"n_parts must be >= 1, got {n_parts}")
    nonnull = ~d.is_null
    ids = d.ids[nonnull]
    if n_parts > ids.size:
        raise ValueError(f"cannot split {ids.size} non-null points into {n_parts} parts")
    if axis == "auto":
        axis_i = int(np.argmax(d.spec.dims))
    else:
        try:
            axis_i = _AXES.index(axis)
        except ValueError:
            raise ValueError(f"axis must be auto or one of {_AXES}, got {axis!r}") from None
    coords = d.spec.cell_index(ids)[:, axis_i]
    order = np.lexsort((ids, coords))
    chunks = np.array_split(order, n_parts)
    slab_ids = tuple(np.sort(ids[c]) for c in chunks)
    boundaries = tuple(int(coords[c[0]]) for c in chunks[1:])
    return PartitionPlan(n_parts=n_parts, axis=_AXES[axis_i], slab_ids=slab_ids,
                         boundaries=boundaries)


def partitioned_reduce(
    d: Dataset,
    plan: PartitionPlan,
    k: int = 20,
    params: SnnParams | None = None,
    *,
    eps_percentile: float = 0.30,
    core_fraction: float = 0.40,
    mutual: bool = True,
    weights=None,
    workers: int = 1,
) -> ReducedDataset:
    """Run the shared-neighbor reduction slab by slab and merge the results.

    Each slab's neighbor search is restricted to the slab, but attributes
    are normalized against the whole dataset's ranges. Cluster labels of the
    merged representatives are offset per slab so they stay distinct.
    """
    rep_ids = []
    rep_idx = []
    rep_attrs = []
    rep_labels = []
    rep_roles = []
    slab_params = []
    slab_rep_counts = []
    cluster_offset = 0
    stats = {"cluster_count": 0, "core_count": 0, "border_count": 0, "noise_count": 0}
    for slab_i, ids in enumerate(plan.slab_ids):
        sub = d.subset(ids, keep_ranges=True)
        try:
            reduced, assignment = snn_reduce(
                sub, k, params,
                eps_percentile=eps_percentile, core_fraction=core_fraction,
                mutual=mutual, weights=weights, workers=workers,
            )
        except (ValueError, DataError) as exc:
            raise DataError(f"slab {slab_i}: {exc}") from exc
        rep_ids.append(reduced.ids)
        rep_idx.append(reduced.idx)
        rep_attrs.append(reduced.attrs)
        rep_labels.append(reduced.labels + cluster_offset)
        rep_roles.append(reduced.roles)
        slab_params.append((assignment.params.eps, assignment.params.min_pts))
        slab_rep_counts.append(reduced.n_representatives)
        cluster_offset += assignment.cluster_count
        for key, value in (
            ("cluster_count", assignment.cluster_count),
            ("core_count", assignment.core_count),
            ("border_count", assignment.border_count),
            ("noise_count", assignment.noise_count),
        ):
            stats[key] += value
        del sub, reduced, assignment

    ids = np.concatenate(rep_ids)
    order = np.argsort(ids, kind="stable")
    record = {
        "k": k,
        "eps_percentile": eps_percentile,
        "core_fraction": core_fraction,
        "mutual": mutual,
        "params_estimated": params is None,
        "axis": plan.axis,
        "slab_counts": list(plan.slab_sizes),
        "slab_rep_counts": slab_rep_counts,
        "slab_eps": [p[0] for p in slab_params],
        "slab_min_pts": [p[1] for p in slab_params],
    }
    record.update(stats)
    if params is not None:
        record["eps"] = params.eps
        record["min_pts"] = params.min_pts
    provenance = ReductionProvenance(
        method="snn",
        params=record,
        source_count=d.n_points,
        nonnull_count=d.nonnull_count,
        partition_count=plan.n_parts,
    )
    return ReducedDataset(
        d.spec,
        ids[order],
        np.concatenate(rep_idx)[order],
        np.concatenate(rep_attrs)[order],
        provenance,
        labels=np.concatenate(rep_labels)[order],
        roles=np.concatenate(rep_roles)[order],
    )
