"""Baseline reductions: box-average scaling and k-medoids selection.

Scaling partitions the grid into an axis-aligned lattice of boxes and emits
one synthetic point per box: the mean attribute value placed at the box's
center cell. It is deliberately kept naive (the center cell may fall outside
the dense part of its box, or even on a null cell) because that weakness is
exactly what the clustering reductions are compared against.

K-medoids follows the classic PAM scheme: greedy BUILD initialization, then
best-improvement SWAP passes. Above a size threshold it clusters a seeded
random sample and assigns the remainder to the nearest medoid. The reduction
keeps, per cluster, the medoid plus its nearest members.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from .grid import Dataset, ReducedDataset, ReductionProvenance, filter_null

__all__ = [
    "ScalingParams",
    "scale_reduce",
    "KMedoidsParams",
    "kmedoids",
    "kmedoids_reduce",
    "KMedoids",
]

DEFAULT_SAMPLE_THRESHOLD = 100_000

_ROW_CHUNK = 256
_F64_CACHE_LIMIT = 4096
_F32_CACHE_LIMIT = 16384


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingParams:
    """Number of boxes per axis after reduction."""

    divisions: tuple[int, int, int]

    def __post_init__(self):
        divisions = tuple(int(v) for v in self.divisions)
        if len(divisions) != 3 or any(v < 1 for v in divisions):
            raise ValueError(f"divisions must be three positive integers, got {self.divisions!r}")
        object.__setattr__(self, "divisions", divisions)

    @classmethod
    def from_edge(cls, dims: tuple[int, int, int], edge: int) -> "ScalingParams":
        """Boxes of (at most) a given cell edge length per axis."""
        if edge < 1:
            raise ValueError(f"edge must be >= 1, got {edge}")
        return cls(tuple(-(-int(d) // int(edge)) for d in dims))


def _axis_boxes(n_cells: int, n_boxes: int):
    # near-equal integer extents, remainders on the leading boxes
    base, rem = divmod(n_cells, n_boxes)
    sizes = np.full(n_boxes, base, dtype=np.int64)
    sizes[:rem] += 1
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    centers = starts + (sizes - 1) // 2
    return starts, centers


def scale_reduce(d: Dataset, s: ScalingParams) -> ReducedDataset:
    """One mean-valued synthetic point per grid box holding any non-null data."""
    nx, ny, nz = d.spec.dims
    dx, dy, dz = s.divisions
    if dx > nx or dy > ny or dz > nz:
        raise ValueError(f"divisions {s.divisions} exceed grid dims {d.spec.dims}")
    idx = d.index_array()
    box = np.empty((d.n_points, 3), dtype=np.int64)
    centers = []
    for axis, (n_cells, n_boxes) in enumerate(zip((nx, ny, nz), (dx, dy, dz))):
        starts, axis_centers = _axis_boxes(n_cells, n_boxes)
        box[:, axis] = np.searchsorted(starts, idx[:, axis], side="right") - 1
        centers.append(axis_centers)
    box_lin = box[:, 0] + dx * (box[:, 1] + dy * box[:, 2])
    n_boxes = dx * dy * dz

    nonnull = ~d.is_null
    counts = np.bincount(box_lin[nonnull], minlength=n_boxes)
    occupied = np.flatnonzero(counts > 0)
    means = np.empty((occupied.size, d.spec.n_attrs), dtype=np.float64)
    for a in range(d.spec.n_attrs):
        sums = np.bincount(box_lin[nonnull], weights=d.attrs[nonnull, a], minlength=n_boxes)
        means[:, a] = sums[occupied] / counts[occupied]

    rep_idx = np.stack(
        [
            centers[0][occupied % dx],
            centers[1][(occupied // dx) % dy],
            centers[2][occupied // (dx * dy)],
        ],
        axis=1,
    )
    rep_ids = d.spec.cell_id(rep_idx)
    order = np.argsort(rep_ids, kind="stable")
    provenance = ReductionProvenance(
        method="scaling",
        params={"divisions": s.divisions, "synthetic_representatives": True},
        source_count=d.n_points,
        nonnull_count=d.nonnull_count,
        partition_count=1,
    )
    return ReducedDataset(
        d.spec, rep_ids[order], rep_idx[order], means[order], provenance
    )


# ---------------------------------------------------------------------------
# k-medoids (PAM)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KMedoidsParams:
    """PAM settings: cluster count, representatives per cluster, swap budget,
    sampling threshold (None = default), RNG seed."""

    n_clusters: int
    per_cluster: int = 1
    max_swap_iters: int = 100
    sample_size: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_clusters < 1:
            raise ValueError(f"n_clusters must be >= 1, got {self.n_clusters}")
        if self.per_cluster < 1:
            raise ValueError(f"per_cluster must be >= 1, got {self.per_cluster}")
        if self.max_swap_iters < 0:
            raise ValueError(f"max_swap_iters must be >= 0, got {self.max_swap_iters}")
        if self.sample_size is not None and self.sample_size < 1:
            raise ValueError(f"sample_size must be >= 1, got {self.sample_size}")


class _Distances:
    """Pairwise-distance row blocks, cached when the matrix fits in memory.

    The float32 cache perturbs distances at the 1e-7 level, which is
    harmless for medoid selection on large inputs; small inputs stay in
    float64 so exactness-sensitive tests and oracles see full precision.
    The swap tolerance absorbs the accumulated rounding of cost deltas.
    """

    def __init__(self, X: np.ndarray):
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.n = X.shape[0]
        self._cache = None
        if self.n <= _F64_CACHE_LIMIT:
            dtype = np.float64
        elif self.n <= _F32_CACHE_LIMIT:
            dtype = np.float32
        else:
            dtype = None
        if dtype is not None:
            self._cache = np.empty((self.n, self.n), dtype=dtype)
            for start in range(0, self.n, _ROW_CHUNK):
                stop = min(start + _ROW_CHUNK, self.n)
                self._cache[start:stop] = self._compute(start, stop)
        self.swap_tol = self.n * (1e-7 if dtype == np.float32 else 1e-13)

    def _compute(self, start, stop):
        diff = self.X[start:stop, None, :] - self.X[None, :, :]
        return np.sqrt((diff * diff).sum(axis=-1))

    def block(self, start: int, stop: int) -> np.ndarray:
        """Rows [start, stop) of the distance matrix (view when cached)."""
        if self._cache is not None:
            return self._cache[start:stop]
        return self._compute(start, stop)

    def rows(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        if self._cache is not None:
            return self._cache[idx]
        out = np.empty((idx.size, self.n), dtype=np.float64)
        for pos, i in enumerate(idx):
            diff = self.X[i, None, :] - self.X
            out[pos] = np.sqrt((diff * diff).sum(axis=-1))
        return out


def _pam_build(dist: _Distances, k: int) -> np.ndarray:
    n = dist.n
    sums = np.empty(n, dtype=np.float64)
    for start in range(0, n, _ROW_CHUNK):
        stop = min(start + _ROW_CHUNK, n)
        sums[start:stop] = dist.block(start, stop).sum(axis=1, dtype=np.float64)
    medoids = [int(np.argmin(sums))]
    nearest = dist.rows([medoids[0]])[0].astype(np.float64)
    is_medoid = np.zeros(n, dtype=bool)
    is_medoid[medoids[0]] = True
    while len(medoids) < k:
        best_gain = -np.inf
        best = -1
        for start in range(0, n, _ROW_CHUNK):
            stop = min(start + _ROW_CHUNK, n)
            block = dist.block(start, stop)
            gains = np.maximum(nearest[None, :] - block, 0.0).sum(axis=1, dtype=np.float64)
            gains[is_medoid[start:stop]] = -np.inf
            local = int(np.argmax(gains))
            if gains[local] > best_gain:
                best_gain = float(gains[local])
                best = start + local
        medoids.append(best)
        is_medoid[best] = True
        np.minimum(nearest, dist.rows([best])[0], out=nearest)
    return np.sort(np.asarray(medoids, dtype=np.int64))


def _pam_swap(dist: _Distances, medoids: np.ndarray, max_iters: int):
    n = dist.n
    k = medoids.shape[0]
    costs = []
    for _ in range(max_iters):
        med_rows = dist.rows(medoids)
        nearest_of = np.argmin(med_rows, axis=0)
        d1 = med_rows[nearest_of, np.arange(n)]
        costs.append(float(d1.sum(dtype=np.float64)))
        if k == 1:
            d2 = np.full(n, np.inf, dtype=d1.dtype)
        else:
            d2 = np.partition(med_rows, 1, axis=0)[1]
        is_medoid = np.zeros(n, dtype=bool)
        is_medoid[medoids] = True
        best_delta = -dist.swap_tol
        best_cand = -1
        best_slot = -1
        for start in range(0, n, _ROW_CHUNK):
            stop = min(start + _ROW_CHUNK, n)
            block = dist.block(start, stop)
            rows = stop - start
            gain = np.minimum(block - d1[None, :], 0.0)
            base = gain.sum(axis=1, dtype=np.float64)
            reassign = np.minimum(block, d2[None, :]) - d1[None, :] - gain
            # per-candidate per-medoid sums in one flattened bincount
            bins = nearest_of[None, :] + k * np.arange(rows)[:, None]
            corr = np.bincount(
                bins.ravel(), weights=reassign.ravel(), minlength=rows * k
            ).reshape(rows, k)
            deltas = base[:, None] + corr
            deltas[is_medoid[start:stop]] = np.inf
            flat = int(np.argmin(deltas))
            cand, slot = divmod(flat, k)
            if deltas[cand, slot] < best_delta:
                best_delta = float(deltas[cand, slot])
                best_cand = start + cand
                best_slot = slot
        if best_cand < 0:
            break
        medoids = medoids.copy()
        medoids[best_slot] = best_cand
        medoids = np.sort(medoids)
    med_rows = dist.rows(medoids)
    labels = np.argmin(med_rows, axis=0).astype(np.int64)
    final_cost = float(med_rows[labels, np.arange(n)].sum(dtype=np.float64))
    costs.append(final_cost)
    return medoids, labels, final_cost, costs


def _fit_kmedoids(X, n_clusters, max_swap_iters, sample_size, seed):
    """Shared PAM driver; returns (medoid rows, labels, cost, history, sampled)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = X.shape[0]
    if n_clusters > n:
        raise ValueError(f"n_clusters={n_clusters} exceeds point count {n}")
    threshold = DEFAULT_SAMPLE_THRESHOLD if sample_size is None else sample_size
    sampled = n > threshold
    if sampled:
        if n_clusters > threshold:
            raise ValueError(
                f"n_clusters={n_clusters} exceeds sample size {threshold}"
            )
        rng = np.random.default_rng(seed)
        sample = np.sort(rng.choice(n, size=threshold, replace=False))
        dist = _Distances(X[sample])
        med_local = _pam_build(dist, n_clusters)
        med_local, _, _, costs = _pam_swap(dist, med_local, max_swap_iters)
        medoids = np.sort(sample[med_local])
        centers = X[medoids]
        labels = np.empty(n, dtype=np.int64)
        cost = 0.0
        for start in range(0, n, 4096):
            chunk = X[start:start + 4096]
            diff = chunk[:, None, :] - centers[None, :, :]
            dmat = np.sqrt((diff * diff).sum(axis=-1))
            labels[start:start + chunk.shape[0]] = np.argmin(dmat, axis=1)
            cost += float(dmat[np.arange(chunk.shape[0]), labels[start:start + chunk.shape[0]]].sum())
        return medoids, labels, cost, costs, True
    dist = _Distances(X)
    medoids = _pam_build(dist, n_clusters)
    medoids, labels, cost, costs = _pam_swap(dist, medoids, max_swap_iters)
    return medoids, labels, cost, costs, False


def kmedoids(d: Dataset, p: KMedoidsParams) -> tuple[np.ndarray, np.ndarray]:
    """Cluster the non-null points; returns (medoid point ids, labels).

    Labels are positional over the non-null points in ascending id order;
    label c corresponds to medoid id medoid_ids[c].
    """
    f = filter_null(d)
    medoid_pos, labels, _, _, _ = _fit_kmedoids(
        f.features(), p.n_clusters, p.max_swap_iters, p.sample_size, p.seed
    )
    return f.ids[medoid_pos], labels


def kmedoids_reduce(d: Dataset, p: KMedoidsParams) -> ReducedDataset:
    """Keep each cluster's medoid plus its per_cluster-1 nearest members."""
    f = filter_null(d)
    X = f.features()
    medoid_pos, labels, _, _, sampled = _fit_kmedoids(
        X, p.n_clusters, p.max_swap_iters, p.sample_size, p.seed
    )
    keep = []
    keep_labels = []
    for c, mpos in enumerate(medoid_pos):
        members = np.flatnonzero(labels == c)
        members = members[members != mpos]
        diff = X[members] - X[mpos]
        dmed = np.sqrt((diff * diff).sum(axis=-1))
        order = np.argsort(dmed, kind="stable")[: p.per_cluster - 1]
        chosen = np.concatenate([[mpos], members[order]])
        keep.append(chosen)
        keep_labels.append(np.full(chosen.size, c, dtype=np.int64))
    keep = np.concatenate(keep)
    keep_labels = np.concatenate(keep_labels)
    order = np.argsort(keep, kind="stable")
    keep = keep[order]
    keep_labels = keep_labels[order]
    provenance = ReductionProvenance(
        method="kmedoids",
        params={
            "n_clusters": p.n_clusters,
            "per_cluster": p.per_cluster,
            "max_swap_iters": p.max_swap_iters,
            "sample_size": p.sample_size,
            "seed": p.seed,
            "sampled": sampled,
        },
        source_count=d.n_points,
        nonnull_count=f.n_points,
        partition_count=1,
    )
    return ReducedDataset(
        f.spec,
        f.ids[keep],
        f.spec.cell_index(f.ids[keep]),
        f.attrs[keep],
        provenance,
        labels=keep_labels,
    )


class KMedoids(ClusterMixin, BaseEstimator):
    """PAM k-medoids with a scikit-learn API.

    Parameters
    ----------
    n_clusters : int, default=8
    max_swap_iters : int, default=100
        Upper bound on SWAP passes; each pass applies the single best
        improving swap.
    sample_size : int or None, default=None
        Cluster a random sample of this size when the input is larger
        (default threshold 100000) and assign the rest to the nearest
        medoid.
    random_state : int, default=0
        Seed for the sampling mode; the full PAM path is deterministic.

    Attributes
    ----------
    medoid_indices_ : ndarray of shape (n_clusters,)
        Row indices of the medoids, ascending.
    cluster_centers_ : ndarray of shape (n_clusters, n_features)
    labels_ : ndarray of shape (n_samples,)
    inertia_ : float
        Total distance of samples to their assigned medoid.
    swap_costs_ : list of float
        Total cost at the start of each SWAP pass plus the final cost.
    """

    def __init__(self, n_clusters=8, max_swap_iters=100, sample_size=None, random_state=0):
        self.n_clusters = n_clusters
        self.max_swap_iters = max_swap_iters
        self.sample_size = sample_size
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        medoids, labels, cost, costs, sampled = _fit_kmedoids(
            X, self.n_clusters, self.max_swap_iters, self.sample_size, self.random_state
        )
        self.medoid_indices_ = medoids
        self.cluster_centers_ = X[medoids]
        self.labels_ = labels
        self.inertia_ = cost
        self.swap_costs_ = costs
        self.sampled_ = sampled
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=np.float64)
        diff = X[:, None, :] - self.cluster_centers_[None, :, :]
        return np.argmin(np.sqrt((diff * diff).sum(axis=-1)), axis=1)
