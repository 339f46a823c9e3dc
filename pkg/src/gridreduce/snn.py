"""Shared-nearest-neighbor similarity graph and density clustering.

The reduction pipeline implemented here:

1. build a similarity graph where two points that appear in each other's
   k-nearest-neighbor lists are linked with weight = number of neighbors
   their lists share (pairs failing the mutuality requirement get weight 0
   and no edge);
2. pick the integer similarity threshold ``eps`` and density threshold
   ``min_pts`` from the observed similarity distribution;
3. run a density clustering over the graph: a point's density is the number
   of neighbors with similarity >= eps, points with density >= min_pts are
   cores, clusters are the connected components of the core subgraph under
   similarity >= eps, non-cores adjacent to a core join its cluster as
   border points, everything else is noise;
4. thin the cores down to "specific" cores: a greedy max-density cover such
   that every core has similarity >= eps to some selected core. The
   specific cores are the representatives of the reduced dataset.

All tie-breaks are by ascending point id, and cluster ids are assigned in
ascending order of each cluster's smallest core id, so results never depend
on traversal or insertion order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from .grid import Dataset, ReducedDataset, ReductionProvenance, filter_null
from .neighbors import NeighborList, knn_indexed, knn_indexed_points

__all__ = [
    "NOISE",
    "ROLE_NOISE",
    "ROLE_BORDER",
    "ROLE_CORE",
    "ROLE_SPECIFIC_CORE",
    "ROLE_NAMES",
    "SnnGraph",
    "SnnParams",
    "ClusterAssignment",
    "build_snn_graph",
    "estimate_params",
    "snn_dbscan",
    "select_specific_cores",
    "snn_reduce",
    "SharedNeighborClustering",
]

NOISE = -1

ROLE_NOISE = 0
ROLE_BORDER = 1
ROLE_CORE = 2
ROLE_SPECIFIC_CORE = 3
ROLE_NAMES = {
    ROLE_NOISE: "noise",
    ROLE_BORDER: "border",
    ROLE_CORE: "core",
    ROLE_SPECIFIC_CORE: "specific_core",
}


class SnnGraph:
    """Sparse symmetric shared-neighbor similarity graph.

    Stored as a CSR matrix over point positions; point_ids maps positions
    back to dataset ids. Absent entries mean similarity 0.
    """

    def __init__(self, point_ids: np.ndarray, matrix: sp.csr_matrix, k: int):
        self.point_ids = np.asarray(point_ids, dtype=np.int64)
        self.k = int(k)
        matrix = matrix.tocsr()
        matrix.sort_indices()
        self._m = matrix
        self._row_of_entry = None

    @property
    def n(self) -> int:
        return self.point_ids.shape[0]

    @property
    def edge_count(self) -> int:
        return self._m.nnz // 2

    def position_of(self, point_id) -> int:
        pos = int(np.searchsorted(self.point_ids, point_id))
        if pos >= self.n or self.point_ids[pos] != point_id:
            raise KeyError(f"point id {point_id} not in graph")
        return pos

    def similarity(self, p_id: int, q_id: int) -> int:
        """Similarity between two points by id; 0 when no edge exists."""
        if p_id == q_id:
            return 0
        p = self.position_of(p_id)
        q = self.position_of(q_id)
        lo, hi = self._m.indptr[p], self._m.indptr[p + 1]
        cols = self._m.indices[lo:hi]
        at = np.searchsorted(cols, q)
        if at < cols.shape[0] and cols[at] == q:
            return int(self._m.data[lo + at])
        return 0

    def row(self, pos: int) -> tuple[np.ndarray, np.ndarray]:
        """(neighbor positions, similarities) of the point at a position."""
        lo, hi = self._m.indptr[pos], self._m.indptr[pos + 1]
        return self._m.indices[lo:hi], self._m.data[lo:hi]

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """Iterate undirected edges once as (p_id, q_id, similarity)."""
        upper = sp.triu(self._m, k=1).tocoo()
        for r, c, s in zip(upper.row, upper.col, upper.data):
            yield int(self.point_ids[r]), int(self.point_ids[c]), int(s)

    def edge_similarities(self) -> np.ndarray:
        """Multiset of stored edge similarities, one entry per edge."""
        return sp.triu(self._m, k=1).tocoo().data.astype(np.int64)

    def density(self, eps: int) -> np.ndarray:
        """Per-point count of neighbors with similarity >= eps."""
        if self._row_of_entry is None:
            self._row_of_entry = np.repeat(
                np.arange(self.n, dtype=np.int64), np.diff(self._m.indptr)
            )
        mask = self._m.data >= eps
        return np.bincount(self._row_of_entry[mask], minlength=self.n).astype(np.int64)


@dataclass(frozen=True)
class SnnParams:
    """Clustering thresholds: neighbor-list size k, similarity floor eps,
    core density floor min_pts."""

    k: int
    eps: int
    min_pts: int

    def __post_init__(self):
        if not 1 <= self.eps <= self.k:
            raise ValueError(f"eps must be in [1, k={self.k}], got {self.eps}")
        if self.min_pts < 1:
            raise ValueError(f"min_pts must be >= 1, got {self.min_pts}")


@dataclass(frozen=True)
class ClusterAssignment:
    """Cluster labels, point roles and densities for one clustering run.

    labels[r] is the cluster of point_ids[r] or NOISE; roles[r] is one of
    the ROLE_* codes; density[r] is the similarity->=eps neighbor count.
    """

    point_ids: np.ndarray
    labels: np.ndarray
    roles: np.ndarray
    density: np.ndarray
    params: SnnParams

    @property
    def n_points(self) -> int:
        return self.point_ids.shape[0]

    @property
    def cluster_count(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size and self.labels.max() >= 0 else 0

    @property
    def core_count(self) -> int:
        return int(np.count_nonzero(self.roles >= ROLE_CORE))

    @property
    def border_count(self) -> int:
        return int(np.count_nonzero(self.roles == ROLE_BORDER))

    @property
    def noise_count(self) -> int:
        return int(np.count_nonzero(self.roles == ROLE_NOISE))

    def role_names(self) -> np.ndarray:
        return np.asarray([ROLE_NAMES[int(r)] for r in self.roles])

    def with_specific_cores(self, specific_ids: np.ndarray) -> "ClusterAssignment":
        """Copy with the given core points upgraded to the specific role."""
        pos = np.searchsorted(self.point_ids, specific_ids)
        if np.any(self.point_ids[pos] != specific_ids):
            raise ValueError("specific core ids not present in assignment")
        if np.any(self.roles[pos] < ROLE_CORE):
            raise ValueError("only core points can become specific cores")
        roles = self.roles.copy()
        roles[pos] = ROLE_SPECIFIC_CORE
        return replace(self, roles=roles)


def build_snn_graph(nl: NeighborList, mutual: bool = True) -> SnnGraph:
    """Similarity graph from neighbor lists.

    With mutual=True (the default) a pair is linked only when each point is
    in the other's neighbor list; otherwise any pair whose lists share at
    least one id is linked. Link weight is the shared-id count, which never
    includes the two endpoints themselves since lists exclude self.
    """
    n = nl.n_points
    m = nl.list_length
    cols = np.searchsorted(nl.point_ids, nl.neighbor_ids.ravel())
    rows = np.repeat(np.arange(n, dtype=np.int64), m)
    adj = sp.csr_matrix(
        (np.ones(n * m, dtype=np.int32), (rows, cols)), shape=(n, n)
    )
    shared = (adj @ adj.T).tocsr()
    if mutual:
        shared = shared.multiply(adj.multiply(adj.T)).tocsr()
    shared.setdiag(0)
    shared.eliminate_zeros()
    shared.data = shared.data.astype(np.int64)
    return SnnGraph(nl.point_ids, shared, nl.k)


def _eps_quantile(sims: np.ndarray, eps_percentile: float, k: int) -> int:
    # nearest-rank quantile of the edge similarity multiset
    rank = max(1, int(np.ceil(eps_percentile * sims.size)))
    eps = int(np.sort(sims)[rank - 1])
    return min(max(eps, 1), k)


def _min_pts_for(g: SnnGraph, eps: int, core_fraction: float) -> int:
    # smallest density floor that lets at most core_fraction of points pass
    dens = g.density(eps)
    limit = core_fraction * g.n
    max_d = int(dens.max()) if dens.size else 0
    counts = np.bincount(dens, minlength=max_d + 2)
    at_least = counts[::-1].cumsum()[::-1]
    for m in range(1, max_d + 2):
        if at_least[m] <= limit:
            return m
    return max_d + 1


def estimate_params(
    g: SnnGraph, eps_percentile: float = 0.30, core_fraction: float = 0.40
) -> SnnParams:
    """Pick eps and min_pts from the graph's similarity distribution.

    eps is the nearest-rank eps_percentile quantile of the stored edge
    similarities; min_pts is the smallest integer such that at most
    core_fraction of the points have density >= min_pts at that eps.
    """
    if not 0.0 < eps_percentile <= 1.0:
        raise ValueError(f"eps_percentile must be in (0, 1], got {eps_percentile}")
    if not 0.0 < core_fraction <= 1.0:
        raise ValueError(f"core_fraction must be in (0, 1], got {core_fraction}")
    sims = g.edge_similarities()
    if sims.size == 0:
        raise ValueError("similarity graph has no edges; thresholds are undefined")
    eps = _eps_quantile(sims, eps_percentile, g.k)
    return SnnParams(k=g.k, eps=eps, min_pts=_min_pts_for(g, eps, core_fraction))


def snn_dbscan(g: SnnGraph, p: SnnParams) -> ClusterAssignment:
    """Density clustering over the similarity graph.

    Cores (density >= min_pts) are grouped into connected components of the
    similarity->=eps core subgraph; a non-core with similarity >= eps to at
    least one core joins the cluster of its highest-similarity core (ties go
    to the lowest cluster id); the rest is noise. Cluster ids follow the
    ascending order of each component's smallest core id.
    """
    if p.k != g.k:
        raise ValueError(f"params built for k={p.k} but graph uses k={g.k}")
    n = g.n
    dens = g.density(p.eps)
    core = dens >= p.min_pts
    labels = np.full(n, NOISE, dtype=np.int64)
    roles = np.full(n, ROLE_NOISE, dtype=np.int8)
    roles[core] = ROLE_CORE

    next_label = 0
    for start in range(n):
        if not core[start] or labels[start] != NOISE:
            continue
        labels[start] = next_label
        stack = [start]
        while stack:
            u = stack.pop()
            cols, sims = g.row(u)
            for v, s in zip(cols, sims):
                if s >= p.eps and core[v] and labels[v] == NOISE:
                    labels[v] = next_label
                    stack.append(v)
        next_label += 1

    for u in np.flatnonzero(~core):
        best_sim = 0
        best_label = -1
        cols, sims = g.row(u)
        for v, s in zip(cols, sims):
            if s >= p.eps and core[v]:
                lbl = labels[v]
                if s > best_sim or (s == best_sim and lbl < best_label):
                    best_sim = s
                    best_label = lbl
        if best_label >= 0:
            labels[u] = best_label
            roles[u] = ROLE_BORDER

    return ClusterAssignment(
        point_ids=g.point_ids, labels=labels, roles=roles, density=dens, params=p
    )


def select_specific_cores(a: ClusterAssignment, g: SnnGraph, p: SnnParams) -> np.ndarray:
    """Greedy max-density cover of the core points.

    Cores are visited in descending density (ties by ascending id); a core
    is selected unless an already-selected core has similarity >= eps to it.
    Every core therefore either is selected or sits one eps-similar hop from
    a selected one, and every cluster contributes at least one selection.
    Returns the selected point ids, ascending.
    """
    core_pos = np.flatnonzero(a.roles >= ROLE_CORE)
    order = core_pos[np.lexsort((core_pos, -a.density[core_pos]))]
    covered = np.zeros(g.n, dtype=bool)
    selected = []
    for pos in order:
        if covered[pos]:
            continue
        selected.append(pos)
        cols, sims = g.row(pos)
        covered[cols[sims >= p.eps]] = True
    return np.sort(g.point_ids[np.asarray(selected, dtype=np.int64)])


def snn_reduce(
    d: Dataset,
    k: int = 20,
    params: SnnParams | None = None,
    *,
    eps_percentile: float = 0.30,
    core_fraction: float = 0.40,
    mutual: bool = True,
    weights=None,
    workers: int = 1,
) -> tuple[ReducedDataset, ClusterAssignment]:
    """Full reduction pipeline: filter nulls, build the similarity graph,
    cluster, and keep the specific cores as representatives.

    With params=None the thresholds are estimated from the graph; explicit
    params skip estimation (their k must match the requested k). The
    representatives are original points, unmodified.
    """
    if params is not None and params.k != k:
        raise ValueError(f"override params have k={params.k}, expected {k}")
    f = filter_null(d)
    nl = knn_indexed(f, k, weights=weights, workers=workers)
    g = build_snn_graph(nl, mutual=mutual)
    estimated = params is None
    if estimated:
        params = estimate_params(g, eps_percentile, core_fraction)
    assignment = snn_dbscan(g, params)
    specific_ids = select_specific_cores(assignment, g, params)
    assignment = assignment.with_specific_cores(specific_ids)
    pos = np.searchsorted(f.ids, specific_ids)
    provenance = ReductionProvenance(
        method="snn",
        params={
            "k": k,
            "eps": params.eps,
            "min_pts": params.min_pts,
            "eps_percentile": eps_percentile,
            "core_fraction": core_fraction,
            "mutual": mutual,
            "params_estimated": estimated,
            "cluster_count": assignment.cluster_count,
            "core_count": assignment.core_count,
            "border_count": assignment.border_count,
            "noise_count": assignment.noise_count,
        },
        source_count=d.n_points,
        nonnull_count=f.n_points,
        partition_count=1,
    )
    reduced = ReducedDataset(
        f.spec,
        specific_ids,
        f.spec.cell_index(specific_ids),
        f.attrs[pos],
        provenance,
        labels=assignment.labels[pos],
        roles=assignment.role_names()[pos],
    )
    return reduced, assignment


class SharedNeighborClustering(ClusterMixin, BaseEstimator):
    """Shared-nearest-neighbor density clustering with a scikit-learn API.

    Operates on an arbitrary feature matrix; for grid datasets use
    snn_reduce, which adds null filtering, normalization and provenance on
    top of the same machinery.

    Parameters
    ----------
    k : int, default=20
        Neighbor list size for the similarity graph.
    eps : int or None, default=None
        Similarity floor; estimated from the graph when None.
    min_pts : int or None, default=None
        Core density floor; estimated from the graph when None.
    eps_percentile, core_fraction : float
        Estimation knobs used for whichever threshold is None.
    mutual : bool, default=True
        Require the pair to appear in each other's neighbor lists.
    workers : int, default=1
        Thread count for the neighbor search.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
        Cluster id per sample, -1 for noise.
    roles_ : ndarray of shape (n_samples,)
        ROLE_* code per sample.
    density_ : ndarray of shape (n_samples,)
        Similarity->=eps neighbor counts.
    eps_, min_pts_ : int
        Thresholds actually used.
    specific_core_indices_ : ndarray
        Row indices of the selected representative cores.
    n_clusters_ : int
    """

    def __init__(self, k=20, eps=None, min_pts=None, eps_percentile=0.30,
                 core_fraction=0.40, mutual=True, workers=1):
        self.k = k
        self.eps = eps
        self.min_pts = min_pts
        self.eps_percentile = eps_percentile
        self.core_fraction = core_fraction
        self.mutual = mutual
        self.workers = workers

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        n = X.shape[0]
        nl = knn_indexed_points(X, np.arange(n, dtype=np.int64), self.k, workers=self.workers)
        g = build_snn_graph(nl, mutual=self.mutual)
        eps = self.eps
        min_pts = self.min_pts
        if eps is None or min_pts is None:
            sims = g.edge_similarities()
            if sims.size == 0:
                raise ValueError(
                    "similarity graph has no edges; pass explicit eps and min_pts"
                )
            if eps is None:
                eps = _eps_quantile(sims, self.eps_percentile, g.k)
            if min_pts is None:
                min_pts = _min_pts_for(g, eps, self.core_fraction)
        params = SnnParams(k=self.k, eps=int(eps), min_pts=int(min_pts))
        assignment = snn_dbscan(g, params)
        specific = select_specific_cores(assignment, g, params)
        assignment = assignment.with_specific_cores(specific)
        self.labels_ = assignment.labels
        self.roles_ = assignment.roles
        self.density_ = assignment.density
        self.eps_ = params.eps
        self.min_pts_ = params.min_pts
        self.specific_core_indices_ = specific
        self.n_clusters_ = assignment.cluster_count
        return self

    def representatives(self, X) -> np.ndarray:
        """Rows of X selected as specific cores (after fit)."""
        check_is_fitted(self, "specific_core_indices_")
        return np.asarray(X)[self.specific_core_indices_]
