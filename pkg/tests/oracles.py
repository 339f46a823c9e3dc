"""Independent reference implementations used to cross-check the library.

Everything here is deliberately written as plain Python loops over dicts and
tuples: no code is shared with the package beyond the distance formula,
which both sides evaluate with the same elementwise arithmetic so results
can be compared exactly.
"""

from __future__ import annotations

import math
from collections import defaultdict


def feature_distance(a, b) -> float:
    s = 0.0
    for x, y in zip(a, b):
        t = float(x) - float(y)
        s += t * t
    return math.sqrt(s)


def naive_knn(X, ids, k):
    """Per point: the min(k, n-1) nearest (distance, id) pairs, ties by id."""
    n = len(X)
    m = min(k, n - 1)
    out = []
    for i in range(n):
        cand = []
        for j in range(n):
            if j == i:
                continue
            cand.append((feature_distance(X[i], X[j]), int(ids[j])))
        cand.sort()
        out.append(cand[:m])
    return out


def naive_snn_edges(neighbor_lists: dict[int, list[int]], mutual: bool = True):
    """Shared-neighbor counts as {(p, q): sim} with p < q, zero-sim pairs absent."""
    sets = {p: set(v) for p, v in neighbor_lists.items()}
    pids = sorted(neighbor_lists)
    edges = {}
    for a, p in enumerate(pids):
        for q in pids[a + 1:]:
            if mutual and not (q in sets[p] and p in sets[q]):
                continue
            sim = len(sets[p] & sets[q])
            if sim > 0:
                edges[(p, q)] = sim
    return edges


def _adjacency(edges):
    adj = defaultdict(dict)
    for (p, q), s in edges.items():
        adj[p][q] = s
        adj[q][p] = s
    return adj


def naive_density(pids, edges, eps):
    dens = {p: 0 for p in pids}
    for (p, q), s in edges.items():
        if s >= eps:
            dens[p] += 1
            dens[q] += 1
    return dens


def naive_dbscan(pids, edges, eps, min_pts):
    """Labels {-1 = noise}, roles {'core'|'border'|'noise'}, densities.

    Clusters are grown by breadth-first search over cores linked with
    similarity >= eps, seeded in ascending id order; borders attach to their
    highest-similarity core with ties to the lowest cluster id.
    """
    adj = _adjacency(edges)
    dens = naive_density(pids, edges, eps)
    pids = sorted(pids)
    core_set = {p for p in pids if dens[p] >= min_pts}
    labels = {p: -1 for p in pids}
    next_label = 0
    for seed in pids:
        if seed not in core_set or labels[seed] != -1:
            continue
        labels[seed] = next_label
        queue = [seed]
        while queue:
            u = queue.pop()
            for v, s in adj[u].items():
                if s >= eps and v in core_set and labels[v] == -1:
                    labels[v] = next_label
                    queue.append(v)
        next_label += 1
    roles = {}
    for p in pids:
        if p in core_set:
            roles[p] = "core"
            continue
        best = None
        for v, s in adj.get(p, {}).items():
            if s >= eps and v in core_set:
                key = (-s, labels[v])
                if best is None or key < best:
                    best = key
        if best is None:
            roles[p] = "noise"
            labels[p] = -1
        else:
            roles[p] = "border"
            labels[p] = best[1]
    return labels, roles, dens


def naive_specific_cores(core_ids, edges, dens, eps):
    """Greedy cover by exhaustive pairwise scan: visit cores by descending
    density (ties ascending id), keep a core unless a kept one is eps-similar."""
    adj = _adjacency(edges)
    cores = sorted(core_ids, key=lambda p: (-dens[p], p))
    selected = []
    for c in cores:
        if any(adj.get(c, {}).get(s, 0) >= eps for s in selected):
            continue
        selected.append(c)
    return sorted(selected)


def naive_min_distances(points, reps):
    """Quadratic scan: distance from each point to its nearest representative."""
    out = []
    for p in points:
        best = math.inf
        for r in reps:
            d = feature_distance(p, r)
            if d < best:
                best = d
        out.append(best)
    return out
