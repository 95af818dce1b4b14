from __future__ import annotations

from typing import TYPE_CHECKING, Any

import networkx as nx
import numpy as np

from src.errors import PageRankDivergedError

if TYPE_CHECKING:
    from collections.abc import Hashable

DEFAULT_DAMPING = 0.85
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200


def pagerank(
    graph: nx.Graph,
    damping: float = DEFAULT_DAMPING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    weight: str = "weight",
) -> dict[Any, float]:
    """Weighted PageRank by power iteration.

    Each node spreads its score over its neighbours in proportion to edge
    weight. Nodes without weighted edges are dangling and hand their mass to
    every node uniformly.

    Args:
        graph: Undirected graph; missing edge weights count as 1.
        damping: Probability of following an edge rather than teleporting.
        tol: L1 change between iterates that counts as converged.
        max_iter: Maximum number of iterations.
        weight: Edge attribute holding the weight.

    Returns:
        Node -> score, summing to 1.

    Raises:
        PageRankDivergedError: If ``tol`` is not met within ``max_iter`` iterations.
    """
    n = graph.number_of_nodes()
    if n == 0:
        raise ValueError("pagerank needs a nonempty graph")
    if not 0 < damping < 1:
        raise ValueError(f"damping must be in (0, 1), got {damping}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")

    nodelist: list[Hashable] = list(graph.nodes)
    matrix = nx.to_scipy_sparse_array(graph, nodelist=nodelist, weight=weight, format="csr")
    out_weight = np.asarray(matrix.sum(axis=1)).ravel()
    dangling = out_weight == 0
    inv = np.divide(1.0, out_weight, out=np.zeros(n), where=~dangling)
    transition = (matrix.multiply(inv[:, None])).tocsr()

    x = np.full(n, 1.0 / n)
    residual = float("inf")
    for _ in range(max_iter):
        last = x
        x = damping * (last @ transition + last[dangling].sum() / n) + (1.0 - damping) / n
        x /= x.sum()
        residual = float(np.abs(x - last).sum())
        if residual < tol:
            return {node: float(score) for node, score in zip(nodelist, x, strict=True)}
    raise PageRankDivergedError(max_iter, residual)
