from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import networkx as nx
import numpy as np
import scipy.sparse as sp

if TYPE_CHECKING:
    from collections.abc import Set as AbstractSet

    from src.cohort.models import Cohort, DiseaseCode

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PatientGraph:
    """Weighted undirected patient graph; ``edges`` maps ``(a, b)`` with ``a < b``."""

    n: int
    threshold: int
    edges: dict[tuple[int, int], int] = field(default_factory=dict)
    patient_ids: tuple[str, ...] = ()

    def weight(self, a: int, b: int) -> int:
        """Shared-disease count, 0 when the pair is not an edge."""
        if a == b:
            return 0
        return self.edges.get((min(a, b), max(a, b)), 0)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        for i in range(self.n):
            graph.add_node(i, patient=self.patient_ids[i] if self.patient_ids else str(i))
        graph.add_weighted_edges_from((a, b, w) for (a, b), w in self.edges.items())
        return graph


def disease_columns(
    cohort: Cohort, exclude: AbstractSet[DiseaseCode] = frozenset()
) -> tuple[DiseaseCode, ...]:
    """The cohort's disease universe without ``exclude``, in universe order."""
    return tuple(c for c in cohort.disease_universe if c not in exclude)


def patient_disease_bipartite(
    cohort: Cohort, exclude: AbstractSet[DiseaseCode] = frozenset()
) -> sp.csr_array:
    """Binary patient x disease incidence over :func:`disease_columns`."""
    columns = disease_columns(cohort, exclude)
    index = {c: i for i, c in enumerate(columns)}
    rows: list[int] = []
    cols: list[int] = []
    for p, patient in enumerate(cohort.patients):
        for code in sorted(patient.diseases - exclude):
            rows.append(p)
            cols.append(index[code])
    data = np.ones(len(rows), dtype=np.int32)
    return sp.csr_array((data, (rows, cols)), shape=(cohort.size, len(columns)))


def build_patient_graph(
    cohort: Cohort, theta: int = 1, exclude: AbstractSet[DiseaseCode] = frozenset()
) -> PatientGraph:
    """Connect patients sharing at least ``theta`` diseases (unioned over admissions).

    Codes in ``exclude`` are not counted as shared.
    """
    if theta < 1:
        raise ValueError(f"theta must be >= 1, got {theta}")
    incidence = patient_disease_bipartite(cohort, exclude)
    shared = sp.triu(incidence @ incidence.T, k=1).tocoo()
    keep = shared.data >= theta
    edges = {
        (int(a), int(b)): int(w)
        for a, b, w in zip(shared.row[keep], shared.col[keep], shared.data[keep], strict=True)
    }
    logger.info("Patient graph: %d nodes, %d edges at theta=%d", cohort.size, len(edges), theta)
    return PatientGraph(
        n=cohort.size,
        threshold=theta,
        edges=dict(sorted(edges.items())),
        patient_ids=tuple(p.id for p in cohort.patients),
    )


def to_adjacency(g: PatientGraph) -> sp.csr_array:
    """Symmetric binary adjacency S with every self-loop set."""
    rows = [a for a, _ in g.edges] + [b for _, b in g.edges] + list(range(g.n))
    cols = [b for _, b in g.edges] + [a for a, _ in g.edges] + list(range(g.n))
    data = np.ones(len(rows), dtype=np.int8)
    return sp.csr_array((data, (rows, cols)), shape=(g.n, g.n))
