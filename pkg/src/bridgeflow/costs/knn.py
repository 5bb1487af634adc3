"""
KNN fused cost: shortest-path distances on a graph joining the two kNN graphs
through the paired points.

Nodes ``0..n-1`` are source points and ``n..n+m-1`` target points. Intra edges
come from a symmetrized Euclidean kNN graph (an edge exists if either endpoint
lists the other); each pair (i, j) in P adds a cross edge of weight
``cross_weight`` (0 by default). Distances are exact Dijkstra path lengths.
"""

from typing import List

import networkx as nx
import numpy as np
from scipy.spatial.distance import cdist

from ..errors import ConnectivityError, InputError
from ..log import debug_print
from ..types import CostMatrix, FeatureMatrix, PairedSet
from .base import BaseFusedCost

DEFAULT_K = 10


def _add_knn_edges(graph: nx.Graph, points: np.ndarray, k: int, offset: int) -> None:
    distances = cdist(points, points, metric="euclidean")
    np.fill_diagonal(distances, np.inf)
    neighbours = np.argsort(distances, axis=1, kind="stable")[:, :k]
    for i, row in enumerate(neighbours):
        for j in row:
            graph.add_edge(offset + i, offset + int(j), weight=float(distances[i, j]))


def fused_knn_graph(
    X: FeatureMatrix,
    Y: FeatureMatrix,
    P: PairedSet,
    k: int = DEFAULT_K,
    cross_weight: float = 0.0,
) -> nx.Graph:
    n, m = X.n, Y.n
    if k < 1 or k >= n or k >= m:
        raise InputError(f"k must satisfy 1 <= k < min(n, m) = {min(n, m)}, got {k}", {"k": k})
    if cross_weight < 0:
        raise InputError(f"cross_weight must be >= 0, got {cross_weight}")
    graph = nx.Graph()
    graph.add_nodes_from(range(n + m))
    _add_knn_edges(graph, X.points, k, 0)
    _add_knn_edges(graph, Y.points, k, n)
    for i, j in P.pairs:
        graph.add_edge(int(i), n + int(j), weight=float(cross_weight))
    return graph


def _describe_components(graph: nx.Graph, n: int) -> List[List[str]]:
    described = []
    for component in sorted(nx.connected_components(graph), key=min):
        labels = [f"x{v}" if v < n else f"y{v - n}" for v in sorted(component)]
        described.append(labels[:20])
    return described


def knn_fused_cost(
    X: FeatureMatrix,
    Y: FeatureMatrix,
    P: PairedSet,
    k: int = DEFAULT_K,
    cross_weight: float = 0.0,
) -> CostMatrix:
    """
    Raises:
        InputError: Bad k or empty P
        ConnectivityError: Some (i, j) pair has no connecting path
    """
    P.validate(X.n, Y.n)
    if len(P) == 0:
        raise InputError("knn fused cost needs at least one paired point", {"pairs": 0})
    n, m = X.n, Y.n
    graph = fused_knn_graph(X, Y, P, k, cross_weight)
    values = np.full((n, m), np.inf)
    for i in range(n):
        lengths = nx.single_source_dijkstra_path_length(graph, i, weight="weight")
        for node, length in lengths.items():
            if node >= n:
                values[i, node - n] = length
    if not np.all(np.isfinite(values)):
        unreachable = int(np.sum(~np.isfinite(values)))
        components = _describe_components(graph, n)
        debug_print(f"[ERROR] fused kNN graph leaves {unreachable} source/target pairs unreachable")
        raise ConnectivityError(
            f"fused kNN graph (k={k}) has {len(components)} components; "
            f"{unreachable} source/target pairs are unreachable",
            {"k": k, "unreachable_pairs": unreachable, "components": components[:10]},
        )
    return CostMatrix(values=values, kind="knn")


class KnnCost(BaseFusedCost):
    """Shortest-path cost on the fused kNN graph"""

    def __init__(self, k: int = DEFAULT_K, cross_weight: float = 0.0, **kwargs):
        super().__init__(**kwargs)
        self.k = k
        self.cross_weight = cross_weight

    def get_cost_name(self) -> str:
        return "knn"

    def build(self, X: FeatureMatrix, Y: FeatureMatrix, P: PairedSet) -> CostMatrix:
        self.check_anchors(X, Y, P)
        return knn_fused_cost(X, Y, P, self.k, self.cross_weight)


__all__ = ["DEFAULT_K", "fused_knn_graph", "knn_fused_cost", "KnnCost"]
