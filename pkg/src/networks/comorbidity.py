"""Disease prevalence, COCO comorbidity networks and the differential network.

COCO uses the co-occurrence *rate* ``co / n`` rather than a raw count so the
weight is dimensionless; two diseases that always co-occur score exactly 1
with the default ``beta = sqrt(2)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import networkx as nx
import numpy as np

from src.errors import DegenerateDdnError, EmptyPopulationError, UndefinedCorrelationError
from src.features.pagerank import pagerank

if TYPE_CHECKING:
    from collections.abc import Sequence
    from collections.abc import Set as AbstractSet

    from src.cohort.models import DiseaseCode, PatientRecord

logger = logging.getLogger(__name__)

DEFAULT_BETA = math.sqrt(2)

Pair = tuple["DiseaseCode", "DiseaseCode"]


def _pair(a: DiseaseCode, b: DiseaseCode) -> Pair:
    return (a, b) if a < b else (b, a)


def prevalence(patients: Sequence[PatientRecord], d: DiseaseCode) -> float:
    """Share of patients diagnosed with ``d`` at any admission."""
    if not patients:
        raise EmptyPopulationError()
    return sum(d in p.diseases for p in patients) / len(patients)


def coco(co: int, pr_i: float, pr_j: float, n: int, beta: float = DEFAULT_BETA) -> float:
    """Co-occurrence correlation of two diseases.

    Args:
        co: Number of patients carrying both diseases.
        pr_i: Prevalence of the first disease.
        pr_j: Prevalence of the second disease.
        n: Population size the counts come from.
        beta: Scale factor.
    """
    if n <= 0 or not 0 <= co <= n:
        raise ValueError(f"co-occurrence count {co} outside [0, {n}]")
    if pr_i == 0 and pr_j == 0:
        raise UndefinedCorrelationError("COCO is undefined when both prevalences are zero")
    return beta * (co / n) / math.sqrt(pr_i**2 + pr_j**2)


@dataclass(frozen=True)
class DiseaseGraph:
    nodes: dict[DiseaseCode, float]
    edges: dict[Pair, float]
    source_count: int

    def edge_weight(self, a: DiseaseCode, b: DiseaseCode) -> float:
        return self.edges.get(_pair(a, b), 0.0)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        for code, pr in self.nodes.items():
            graph.add_node(code, prevalence=pr)
        for (a, b), w in self.edges.items():
            graph.add_edge(a, b, weight=w)
        return graph


def _incidence(
    patients: Sequence[PatientRecord], exclude: AbstractSet[DiseaseCode] = frozenset()
) -> tuple[list[DiseaseCode], np.ndarray]:
    codes = sorted(set().union(*(p.diseases for p in patients)) - exclude)
    index = {c: i for i, c in enumerate(codes)}
    matrix = np.zeros((len(patients), len(codes)), dtype=np.float64)
    for row, patient in enumerate(patients):
        matrix[row, [index[c] for c in patient.diseases - exclude]] = 1.0
    return codes, matrix


def build_disease_graph(
    patients: Sequence[PatientRecord],
    beta: float = DEFAULT_BETA,
    min_coco: float = 0.0,
    exclude: AbstractSet[DiseaseCode] = frozenset(),
) -> DiseaseGraph:
    """Prevalence per disease and a COCO edge for each co-occurring pair above ``min_coco``.

    Codes in ``exclude`` are dropped before counting, as if no patient carried them.
    """
    if not patients:
        raise EmptyPopulationError()
    n = len(patients)
    codes, matrix = _incidence(patients, exclude)
    co = matrix.T @ matrix
    pr = np.diag(co) / n
    norm = np.sqrt(pr[:, None] ** 2 + pr[None, :] ** 2)
    weights = beta * (co / n) / norm

    edges: dict[Pair, float] = {}
    rows, cols = np.nonzero(np.triu(co, k=1))
    for i, j in zip(rows.tolist(), cols.tolist(), strict=True):
        w = float(weights[i, j])
        if w >= min_coco:
            edges[(codes[i], codes[j])] = w
    return DiseaseGraph(
        nodes={c: float(pr[i]) for i, c in enumerate(codes)}, edges=edges, source_count=n
    )


@dataclass(frozen=True)
class DifferentialNetwork:
    """Rectified case-minus-control network with PageRank over its nodes."""

    nodes: dict[DiseaseCode, float]
    edges: dict[Pair, float]
    pagerank: dict[DiseaseCode, float] = field(default_factory=dict)

    def node_weight(self, d: DiseaseCode) -> float:
        return self.nodes.get(d, 0.0)

    def edge_weight(self, a: DiseaseCode, b: DiseaseCode) -> float:
        return self.edges.get(_pair(a, b), 0.0)

    def rank(self, d: DiseaseCode) -> float:
        return self.pagerank.get(d, 0.0)

    @property
    def node_set(self) -> set[DiseaseCode]:
        """Weighted nodes plus endpoints of weighted edges."""
        return set(self.nodes) | {c for pair in self.edges for c in pair}

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        for code in sorted(self.node_set):
            graph.add_node(code, weight=self.node_weight(code), pagerank=self.rank(code))
        for (a, b), w in self.edges.items():
            graph.add_edge(a, b, weight=w)
        return graph

    def top_nodes(self, k: int) -> list[tuple[DiseaseCode, float]]:
        return sorted(self.nodes.items(), key=lambda kv: (-kv[1], kv[0]))[:k]

    def top_edges(self, k: int) -> list[tuple[Pair, float]]:
        return sorted(self.edges.items(), key=lambda kv: (-kv[1], kv[0]))[:k]


def build_ddn(
    case_train: Sequence[PatientRecord],
    control_train: Sequence[PatientRecord],
    beta: float = DEFAULT_BETA,
    min_coco: float = 0.0,
    damping: float = 0.85,
    exclude: AbstractSet[DiseaseCode] = frozenset(),
) -> DifferentialNetwork:
    """Differential disease network from training-portion case and control patients.

    Both groups are built without an edge cutoff; ``min_coco`` applies to the
    rectified excess, so a control edge below the cutoff still cancels its case
    counterpart. Codes in ``exclude`` never enter either group.

    Raises:
        EmptyPopulationError: If either group is empty.
        DegenerateDdnError: If no node or edge has positive excess weight.
    """
    case = build_disease_graph(case_train, beta, exclude=exclude)
    control = build_disease_graph(control_train, beta, exclude=exclude)

    nodes = {}
    for code in sorted(set(case.nodes) | set(control.nodes)):
        excess = case.nodes.get(code, 0.0) - control.nodes.get(code, 0.0)
        if excess > 0:
            nodes[code] = excess
    edges = {}
    for pair in sorted(set(case.edges) | set(control.edges)):
        excess = case.edges.get(pair, 0.0) - control.edges.get(pair, 0.0)
        if excess > 0 and excess >= min_coco:
            edges[pair] = excess

    if not nodes and not edges:
        raise DegenerateDdnError("Case and control groups produce an empty differential network")

    graph = nx.Graph()
    graph.add_nodes_from(sorted(set(nodes) | {c for pair in edges for c in pair}))
    graph.add_weighted_edges_from((a, b, w) for (a, b), w in edges.items())
    ranks = pagerank(graph, damping=damping)
    logger.info("DDN: %d nodes, %d edges", graph.number_of_nodes(), len(edges))
    return DifferentialNetwork(nodes=nodes, edges=edges, pagerank=ranks)
