from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import networkx as nx
import numpy as np

if TYPE_CHECKING:
    from src.networks.comorbidity import DifferentialNetwork, DiseaseGraph


@dataclass(frozen=True)
class RiskCluster:
    diseases: frozenset[str]
    weight: float

    def __len__(self) -> int:
        return len(self.diseases)


def weight_percentile(g: DiseaseGraph | DifferentialNetwork, q: float = 75.0) -> float:
    """Edge-weight percentile; 0 for a graph without edges."""
    if not g.edges:
        return 0.0
    return float(np.percentile(np.fromiter(g.edges.values(), dtype=np.float64), q))


def high_risk_clusters(
    g: DiseaseGraph | DifferentialNetwork, min_weight: float
) -> list[RiskCluster]:
    """Connected components over edges weighing at least ``min_weight``.

    Components are sorted by total internal edge weight, heaviest first;
    isolated diseases are dropped.
    """
    kept = nx.Graph()
    kept.add_weighted_edges_from((a, b, w) for (a, b), w in g.edges.items() if w >= min_weight)
    clusters = []
    for component in nx.connected_components(kept):
        if len(component) < 2:
            continue
        weight = kept.subgraph(component).size(weight="weight")
        clusters.append(RiskCluster(diseases=frozenset(component), weight=float(weight)))
    clusters.sort(key=lambda c: (-c.weight, sorted(c.diseases)))
    return clusters
