"""Core dataset model for volumetric grid data.

A dataset is a set of samples on a regular (nx, ny, nz) grid. Each sample
carries integer grid coordinates, one or more real attribute values, and a
null flag (missing data is marked with a sentinel attribute value). Point ids
are the row-major linearisation of the grid coordinates with the x index
varying fastest, so id and (i, j, k) determine each other.

Distance computations throughout the package run in a normalized feature
space: grid coordinates divided by their axis extent and attributes min-max
scaled to [0, 1], so spatial and attribute dimensions are commensurate.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Iterator

import numpy as np

__all__ = [
    "NULL_SENTINEL",
    "GridSpec",
    "PointRecord",
    "Dataset",
    "ReducedDataset",
    "ReductionProvenance",
    "filter_null",
    "normalize_point",
    "normalized_features",
]

REDUCTION_METHODS = ("snn", "scaling", "kmedoids")

# Default missing-data marker: 1.0e35 at float32 precision, the conventional
# value in raw volume bricks. Brick files store float32, so the float64 form
# of the marker must be the upcast float32 value or sentinel cells would stop
# comparing equal after a load.
NULL_SENTINEL = float(np.float32(1.0e35))


@dataclass(frozen=True)
class GridSpec:
    """Geometry and attribute layout of a grid dataset.

    dims is (nx, ny, nz), the number of cells per axis. null_sentinel is the
    attribute value that marks missing samples. timestep identifies the
    snapshot the data belongs to; it does not affect any computation.
    """

    dims: tuple[int, int, int]
    attr_names: tuple[str, ...] = ("value",)
    null_sentinel: float = NULL_SENTINEL
    timestep: int = 0

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or any(d < 1 for d in dims):
            raise ValueError(f"dims must be three positive integers, got {self.dims!r}")
        names = tuple(str(a) for a in self.attr_names)
        if not names or len(set(names)) != len(names):
            raise ValueError(f"attr_names must be non-empty and unique, got {self.attr_names!r}")
        if self.timestep < 0:
            raise ValueError(f"timestep must be >= 0, got {self.timestep}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "attr_names", names)
        object.__setattr__(self, "null_sentinel", float(self.null_sentinel))
        object.__setattr__(self, "timestep", int(self.timestep))

    @property
    def n_cells(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def n_attrs(self) -> int:
        return len(self.attr_names)

    def cell_id(self, idx) -> np.ndarray:
        """Row-major cell id(s) for (i, j, k) coordinates, x fastest."""
        nx, ny, _ = self.dims
        idx = np.asarray(idx, dtype=np.int64)
        return idx[..., 0] + nx * (idx[..., 1] + ny * idx[..., 2])

    def cell_index(self, ids) -> np.ndarray:
        """Inverse of cell_id: (..., 3) array of grid coordinates."""
        nx, ny, _ = self.dims
        ids = np.asarray(ids, dtype=np.int64)
        i = ids % nx
        j = (ids // nx) % ny
        k = ids // (nx * ny)
        return np.stack([i, j, k], axis=-1)


@dataclass(frozen=True)
class PointRecord:
    """One grid sample: id, grid coordinates, attribute vector, null flag."""

    id: int
    idx: tuple[int, int, int]
    attrs: tuple[float, ...]
    is_null: bool


class Dataset:
    """Immutable collection of grid samples.

    Points are stored as parallel arrays sorted by id, so all derived results
    are independent of the order in which points were supplied. attr_ranges
    holds the per-attribute (min, max) over non-null points; it can be
    overridden to normalize a subset against the ranges of a larger dataset.
    """

    def __init__(self, spec: GridSpec, ids, attrs, is_null=None, attr_ranges=None):
        ids = np.ascontiguousarray(np.asarray(ids, dtype=np.int64))
        attrs = np.asarray(attrs, dtype=np.float64)
        if attrs.ndim == 1:
            attrs = attrs.reshape(-1, 1)
        if ids.ndim != 1 or attrs.shape != (ids.shape[0], spec.n_attrs):
            raise ValueError(
                f"expected ids (n,) and attrs (n, {spec.n_attrs}), "
                f"got {ids.shape} and {attrs.shape}"
            )
        if ids.size:
            if ids.min() < 0 or ids.max() >= spec.n_cells:
                raise ValueError("point ids out of range for grid dims")
        order = np.argsort(ids, kind="stable")
        ids = ids[order]
        attrs = attrs[order]
        if ids.size > 1 and np.any(ids[1:] == ids[:-1]):
            dup = int(ids[np.flatnonzero(ids[1:] == ids[:-1])[0]])
            raise ValueError(f"duplicate point id {dup}")
        if is_null is None:
            is_null = np.any(attrs == spec.null_sentinel, axis=1)
        else:
            is_null = np.asarray(is_null, dtype=bool)[order]
            if is_null.shape != ids.shape:
                raise ValueError("is_null mask shape mismatch")
        self.spec = spec
        self.ids = ids
        self.attrs = attrs
        self.is_null = is_null
        if attr_ranges is None:
            attr_ranges = _compute_ranges(attrs, is_null)
        else:
            attr_ranges = np.asarray(attr_ranges, dtype=np.float64).reshape(spec.n_attrs, 2)
            if np.any(attr_ranges[:, 0] > attr_ranges[:, 1]):
                raise ValueError("attr_ranges must satisfy min <= max")
        self.attr_ranges = attr_ranges
        self.ids.setflags(write=False)
        self.attrs.setflags(write=False)
        self.is_null.setflags(write=False)
        self.attr_ranges.setflags(write=False)

    # -- basic queries -------------------------------------------------

    def __len__(self) -> int:
        return self.ids.shape[0]

    @property
    def n_points(self) -> int:
        return self.ids.shape[0]

    @property
    def nonnull_count(self) -> int:
        return int(np.count_nonzero(~self.is_null))

    @property
    def is_grid_complete(self) -> bool:
        return self.n_points == self.spec.n_cells

    def index_array(self) -> np.ndarray:
        """(n, 3) grid coordinates, derived from the ids."""
        return self.spec.cell_index(self.ids)

    def record(self, position: int) -> PointRecord:
        """PointRecord for the point at a storage position (not id)."""
        idx = self.spec.cell_index(self.ids[position])
        return PointRecord(
            id=int(self.ids[position]),
            idx=tuple(int(v) for v in idx),
            attrs=tuple(float(v) for v in self.attrs[position]),
            is_null=bool(self.is_null[position]),
        )

    def records(self) -> Iterator[PointRecord]:
        for pos in range(self.n_points):
            yield self.record(pos)

    # -- derived datasets ----------------------------------------------

    def subset(self, ids, keep_ranges: bool = False) -> "Dataset":
        """Dataset restricted to the given point ids.

        With keep_ranges the subset normalizes against this dataset's
        attribute ranges instead of its own, which keeps feature spaces of
        different subsets commensurable.
        """
        ids = np.asarray(ids, dtype=np.int64)
        pos = np.searchsorted(self.ids, ids)
        if np.any(pos >= self.n_points) or np.any(self.ids[pos] != ids):
            raise ValueError("subset ids not present in dataset")
        return Dataset(
            self.spec,
            self.ids[pos],
            self.attrs[pos],
            is_null=self.is_null[pos],
            attr_ranges=self.attr_ranges if keep_ranges else None,
        )

    def features(self, weights=None) -> np.ndarray:
        """Normalized feature matrix (n, 3 + n_attrs) for a null-free dataset."""
        if np.any(self.is_null):
            raise ValueError("features are undefined for null points; filter first")
        return normalized_features(
            self.spec, self.attr_ranges, self.index_array(), self.attrs, weights=weights
        )


def _compute_ranges(attrs: np.ndarray, is_null: np.ndarray) -> np.ndarray:
    valid = attrs[~is_null]
    n_attrs = attrs.shape[1]
    if valid.shape[0] == 0:
        return np.zeros((n_attrs, 2), dtype=np.float64)
    return np.stack([valid.min(axis=0), valid.max(axis=0)], axis=1)


def filter_null(d: Dataset) -> Dataset:
    """Dataset containing exactly the non-null points of d, ids preserved.

    The attribute ranges carry over: they are computed from non-null points
    only, so refiltering cannot change them, and explicitly injected ranges
    (see Dataset.subset) must survive the filter.
    """
    if not np.any(d.is_null):
        return d
    keep = ~d.is_null
    return Dataset(
        d.spec,
        d.ids[keep],
        d.attrs[keep],
        is_null=np.zeros(int(keep.sum()), dtype=bool),
        attr_ranges=d.attr_ranges,
    )


def normalized_features(spec: GridSpec, attr_ranges, idx, attrs, weights=None) -> np.ndarray:
    """Map grid coordinates + attributes into the normalized feature space.

    Coordinates map to i/(nx-1) etc.; attributes to (a - min)/(max - min).
    A degenerate axis (single cell, or min == max) maps to 0.0. Optional
    per-dimension weights scale the resulting columns.
    """
    idx = np.asarray(idx, dtype=np.float64)
    attrs = np.asarray(attrs, dtype=np.float64)
    if attrs.ndim == 1:
        attrs = attrs.reshape(-1, 1)
    attr_ranges = np.asarray(attr_ranges, dtype=np.float64)
    n = idx.shape[0]
    n_attrs = attrs.shape[1]
    out = np.zeros((n, 3 + n_attrs), dtype=np.float64)
    for axis in range(3):
        extent = spec.dims[axis] - 1
        if extent > 0:
            out[:, axis] = idx[:, axis] / extent
    for a in range(n_attrs):
        lo, hi = attr_ranges[a]
        span = hi - lo
        if span > 0:
            out[:, 3 + a] = (attrs[:, a] - lo) / span
    if weights is not None:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (3 + n_attrs,):
            raise ValueError(f"weights must have shape ({3 + n_attrs},)")
        out *= weights
    return out


def normalize_point(d: Dataset, p: PointRecord, weights=None) -> np.ndarray:
    """Normalized feature vector of a single non-null point."""
    if p.is_null:
        raise ValueError(f"cannot normalize null point {p.id}")
    idx = np.asarray([p.idx], dtype=np.int64)
    attrs = np.asarray([p.attrs], dtype=np.float64)
    return normalized_features(d.spec, d.attr_ranges, idx, attrs, weights=weights)[0]


@dataclass(frozen=True)
class ReductionProvenance:
    """How a reduced dataset was produced: method, parameters, source sizes."""

    method: str
    params: dict[str, Any] = field(default_factory=dict)
    source_count: int = 0
    nonnull_count: int = 0
    partition_count: int = 1

    def __post_init__(self):
        if self.method not in REDUCTION_METHODS:
            raise ValueError(f"unknown reduction method {self.method!r}")
        if not (0 < self.nonnull_count <= self.source_count):
            raise ValueError(
                f"need 0 < nonnull_count <= source_count, "
                f"got {self.nonnull_count} / {self.source_count}"
            )
        if self.partition_count < 1:
            raise ValueError("partition_count must be >= 1")


class ReducedDataset:
    """Representative points standing in for a much larger source dataset.

    Representatives are real points for the clustering methods and synthetic
    averaged points for scaling. labels/roles are optional per-representative
    metadata (cluster id and point role) emitted by the clustering reducers.
    """

    def __init__(self, spec: GridSpec, ids, idx, attrs, provenance: ReductionProvenance,
                 labels=None, roles=None):
        ids = np.asarray(ids, dtype=np.int64)
        idx = np.asarray(idx, dtype=np.int64)
        attrs = np.asarray(attrs, dtype=np.float64)
        if attrs.ndim == 1:
            attrs = attrs.reshape(-1, 1)
        n = ids.shape[0]
        if idx.shape != (n, 3) or attrs.shape != (n, spec.n_attrs):
            raise ValueError("representative array shapes disagree")
        if n > provenance.source_count:
            raise ValueError(
                f"{n} representatives exceed source count {provenance.source_count}"
            )
        self.spec = spec
        self.ids = ids
        self.idx = idx
        self.attrs = attrs
        self.provenance = provenance
        self.labels = None if labels is None else np.asarray(labels, dtype=np.int64)
        self.roles = None if roles is None else np.asarray(roles)
        if self.labels is not None and self.labels.shape != (n,):
            raise ValueError("labels shape mismatch")
        if self.roles is not None and self.roles.shape != (n,):
            raise ValueError("roles shape mismatch")

    def __len__(self) -> int:
        return self.ids.shape[0]

    @property
    def n_representatives(self) -> int:
        return self.ids.shape[0]

    def records(self) -> Iterator[PointRecord]:
        for pos in range(self.n_representatives):
            yield PointRecord(
                id=int(self.ids[pos]),
                idx=tuple(int(v) for v in self.idx[pos]),
                attrs=tuple(float(v) for v in self.attrs[pos]),
                is_null=False,
            )

    def features(self, attr_ranges, weights=None) -> np.ndarray:
        """Features of the representatives in a given normalization frame."""
        return normalized_features(self.spec, attr_ranges, self.idx, self.attrs, weights=weights)


def replace_sentinel(spec: GridSpec, sentinel: float) -> GridSpec:
    return dataclasses.replace(spec, null_sentinel=sentinel)
