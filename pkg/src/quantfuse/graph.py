"""K-nearest-neighbor graph over (t, tau) points and its oriented incidence map."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KnnGraph:
    """Undirected KNN graph with an oriented edge orientation i < k.

    ``edge_i``/``edge_k`` are parallel arrays of node indices (0-based,
    edge_i[m] < edge_k[m], lexicographically sorted). ``labels[i]`` is the
    connected-component id of node i.
    """

    n_nodes: int
    edge_i: np.ndarray
    edge_k: np.ndarray
    labels: np.ndarray

    @property
    def n_edges(self) -> int:
        return self.edge_i.shape[0]

    @property
    def edges(self):
        """Edge list as (i, k) pairs with i < k."""
        return list(zip(self.edge_i.tolist(), self.edge_k.tolist()))

    @property
    def n_components(self) -> int:
        return int(self.labels.max()) + 1 if self.n_nodes else 0

    @property
    def components(self):
        """Partition of the nodes into connected components."""
        return [np.flatnonzero(self.labels == l) for l in range(self.n_components)]


def _component_labels(n, ei, ek):
    # union-find with path halving
    parent = np.arange(n)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, k in zip(ei, ek):
        ri, rk = find(i), find(k)
        if ri != rk:
            parent[max(ri, rk)] = min(ri, rk)
    roots = np.array([find(i) for i in range(n)])
    _, labels = np.unique(roots, return_inverse=True)
    return labels.astype(np.int64)


def knn_indices(points, query, K, axis_weights=(1.0, 1.0), exclude_self=False):
    """Indices of the K nearest rows of ``points`` for each row of ``query``.

    Euclidean metric with optional per-axis weights; ties broken by lower
    index (stable sort on distance). With exclude_self=True, points and
    query must be the same array and row i never selects itself.

    Returns an array of shape (len(query), K).
    """
    pts = np.asarray(points, dtype=np.float64) * np.asarray(axis_weights, dtype=np.float64)
    qry = np.asarray(query, dtype=np.float64) * np.asarray(axis_weights, dtype=np.float64)
    d2 = ((qry[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    if exclude_self:
        np.fill_diagonal(d2, np.inf)
    # stable argsort keeps equal distances in index order
    order = np.argsort(d2, axis=1, kind="stable")
    return order[:, :K]


def build_knn_graph(points, K, axis_weights=(1.0, 1.0)) -> KnnGraph:
    """Build the symmetrized KNN graph over (t, tau) points.

    The directed rule "i is among the K nearest neighbors of k, or vice
    versa" is deduplicated into undirected edges stored with i < k.
    Deterministic: distance ties break toward the lower node index.
    """
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    if n < 2:
        raise ValueError("need at least 2 points, got %d" % n)
    if not (0 < K < n):
        raise ValueError("K must satisfy 0 < K < n, got K=%d, n=%d" % (K, n))
    if not np.isfinite(pts).all():
        raise ValueError("points contain non-finite values")
    nn = knn_indices(pts, pts, K, axis_weights=axis_weights, exclude_self=True)
    src = np.repeat(np.arange(n), K)
    dst = nn.ravel()
    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    pairs = np.unique(np.column_stack([lo, hi]), axis=0)
    ei = pairs[:, 0].astype(np.int64)
    ek = pairs[:, 1].astype(np.int64)
    return KnnGraph(n_nodes=n, edge_i=ei, edge_k=ek, labels=_component_labels(n, ei, ek))


def apply_H(graph: KnnGraph, v) -> np.ndarray:
    """Edge differences (H v)_m = v[i_m] - v[k_m]."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != graph.n_nodes:
        raise ValueError("vector length %d != n_nodes %d" % (v.shape[0], graph.n_nodes))
    return v[graph.edge_i] - v[graph.edge_k]


def apply_Ht(graph: KnnGraph, w) -> np.ndarray:
    """Adjoint map: accumulate +w on edge heads and -w on edge tails."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape[0] != graph.n_edges:
        raise ValueError("vector length %d != n_edges %d" % (w.shape[0], graph.n_edges))
    out = np.zeros(graph.n_nodes)
    np.add.at(out, graph.edge_i, w)
    np.subtract.at(out, graph.edge_k, w)
    return out


def write_edges_csv(path, graph: KnnGraph) -> None:
    """Debug export: ``edge_id,i,k`` with 1-based node indices."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["edge_id", "i", "k"])
        for m in range(graph.n_edges):
            writer.writerow([m + 1, graph.edge_i[m] + 1, graph.edge_k[m] + 1])
