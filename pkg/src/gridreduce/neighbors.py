"""Exact k-nearest-neighbor search over the normalized feature space.

Two implementations with identical output contracts: a quadratic reference
(`knn_brute`) and a kd-tree backed one (`knn_indexed`). Both order each
neighbor list by ascending distance with ties broken by ascending point id
and both exclude the query point itself, so their results are element-for-
element equal on every input, including degenerate ones with duplicated
feature vectors.

The indexed path uses the tree only to produce candidate sets; final
distances are recomputed with the same arithmetic as the brute path, which
keeps the two bitwise comparable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .grid import Dataset, filter_null

__all__ = ["NeighborList", "knn_brute", "knn_indexed", "knn_brute_points", "knn_indexed_points"]

_BRUTE_CHUNK = 512


@dataclass(frozen=True)
class NeighborList:
    """Per-point ordered nearest neighbors.

    point_ids is sorted ascending; row r of neighbor_ids/distances lists the
    min(k, n-1) nearest neighbors of point_ids[r], closest first.
    """

    k: int
    point_ids: np.ndarray
    neighbor_ids: np.ndarray
    distances: np.ndarray

    @property
    def n_points(self) -> int:
        return self.point_ids.shape[0]

    @property
    def list_length(self) -> int:
        return self.neighbor_ids.shape[1]


def _check_points(X: np.ndarray, ids: np.ndarray, k: int) -> None:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if X.shape[0] < 2:
        raise ValueError(f"need at least 2 points for neighbor search, got {X.shape[0]}")
    if ids.shape != (X.shape[0],):
        raise ValueError("ids must be one per point")
    if ids.shape[0] > 1 and np.any(ids[1:] <= ids[:-1]):
        raise ValueError("ids must be strictly increasing")


def knn_brute_points(X, ids, k: int) -> NeighborList:
    """Reference quadratic kNN over raw feature rows."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    ids = np.asarray(ids, dtype=np.int64)
    _check_points(X, ids, k)
    n = X.shape[0]
    m = min(k, n - 1)
    neighbor_ids = np.empty((n, m), dtype=np.int64)
    distances = np.empty((n, m), dtype=np.float64)
    for start in range(0, n, _BRUTE_CHUNK):
        stop = min(start + _BRUTE_CHUNK, n)
        diff = X[start:stop, None, :] - X[None, :, :]
        dmat = np.sqrt((diff * diff).sum(axis=-1))
        for row, i in enumerate(range(start, stop)):
            drow = dmat[row]
            drow[i] = np.inf
            # stable sort on distance: positions ascend within ties, and
            # positions ascend exactly with ids
            order = np.argsort(drow, kind="stable")[:m]
            neighbor_ids[i] = ids[order]
            distances[i] = drow[order]
    return NeighborList(k=k, point_ids=ids, neighbor_ids=neighbor_ids, distances=distances)


def knn_indexed_points(X, ids, k: int, workers: int = 1) -> NeighborList:
    """kd-tree kNN with output identical to knn_brute_points.

    The tree supplies, per point, a ball of candidates guaranteed to cover
    the true k nearest (the ball radius is the tree's (k+1)-th neighbor
    distance inflated enough to absorb last-ulp metric differences); the
    candidates are then re-ranked with the reference arithmetic.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    ids = np.asarray(ids, dtype=np.int64)
    _check_points(X, ids, k)
    n = X.shape[0]
    m = min(k, n - 1)
    tree = cKDTree(X)
    kq = min(k + 1, n)
    tree_dist, _ = tree.query(X, k=kq, workers=workers)
    radii = tree_dist[:, -1] * (1.0 + 1e-9) + 1e-12
    groups = tree.query_ball_point(X, radii, workers=workers)
    neighbor_ids = np.empty((n, m), dtype=np.int64)
    distances = np.empty((n, m), dtype=np.float64)
    for i in range(n):
        cand = np.asarray(groups[i], dtype=np.int64)
        cand.sort()
        diff = X[cand] - X[i]
        d = np.sqrt((diff * diff).sum(axis=-1))
        d[cand == i] = np.inf
        order = np.argsort(d, kind="stable")[:m]
        neighbor_ids[i] = ids[cand[order]]
        distances[i] = d[order]
    return NeighborList(k=k, point_ids=ids, neighbor_ids=neighbor_ids, distances=distances)


def knn_brute(d: Dataset, k: int, weights=None) -> NeighborList:
    """Exact kNN of the non-null points of d (quadratic reference)."""
    f = filter_null(d)
    return knn_brute_points(f.features(weights=weights), f.ids, k)


def knn_indexed(d: Dataset, k: int, weights=None, workers: int = 1) -> NeighborList:
    """Exact kNN of the non-null points of d (indexed, same output as brute)."""
    f = filter_null(d)
    return knn_indexed_points(f.features(weights=weights), f.ids, k, workers=workers)
