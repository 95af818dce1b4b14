"""Directed progression pathways toward the target disease.

An edge ``d_i -> d_j`` carries ``P(d_j diagnosed at a strictly later admission
than d_i's first diagnosis | patient carries d_i)`` over the case group. Codes
sharing only an admission contribute no edge.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any

import networkx as nx
import pandas as pd

from src.errors import NoTargetReachedError
from src.networks.export import to_dot

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from src.cohort.models import PatientRecord

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.2


@dataclass(frozen=True)
class PathwayGraph:
    graph: nx.DiGraph
    targets: frozenset[str]
    threshold: float

    @property
    def edges(self) -> dict[tuple[str, str], float]:
        return {(a, b): float(w) for a, b, w in self.graph.edges(data="weight")}

    @property
    def highlighted(self) -> list[tuple[str, str]]:
        return sorted((a, b) for a, b, h in self.graph.edges(data="highlighted") if h)

    def weight(self, a: str, b: str) -> float:
        data = self.graph.get_edge_data(a, b)
        return float(data["weight"]) if data else 0.0

    def to_dot(self) -> str:
        return to_dot(self.graph, name="pathways")

    def to_json(self) -> dict[str, Any]:
        return {
            "targets": sorted(self.targets),
            "threshold": self.threshold,
            "nodes": sorted(self.graph.nodes),
            "edges": [
                {"source": a, "target": b, "weight": w, "highlighted": w > self.threshold}
                for (a, b), w in sorted(self.edges.items())
            ],
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(a, b, w, w > self.threshold) for (a, b), w in sorted(self.edges.items())],
            columns=["source", "target", "weight", "highlighted"],
        )

    def to_csv(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.10g")
        return path


def progression_pathways(
    case_group: Sequence[PatientRecord],
    targets: Iterable[str],
    threshold: float = DEFAULT_THRESHOLD,
) -> PathwayGraph:
    """Temporal conditional progression graph restricted to codes that lead to a target.

    Raises:
        NoTargetReachedError: If no case patient carries any target code.
    """
    target_set = frozenset(targets)
    if not any(target_set & p.diseases for p in case_group):
        raise NoTargetReachedError(f"No patient carries any of {sorted(target_set)}")

    carriers: Counter[str] = Counter()
    follows: Counter[tuple[str, str]] = Counter()
    for patient in case_group:
        first = {code: patient.first_seq(code) for code in patient.diseases}
        last = {code: patient.last_seq(code) for code in patient.diseases}
        carriers.update(patient.diseases)
        for d_i, start in first.items():
            for d_j, end in last.items():
                if d_i != d_j and end > start:  # type: ignore[operator]
                    follows[(d_i, d_j)] += 1

    full = nx.DiGraph()
    for (d_i, d_j), count in sorted(follows.items()):
        weight = count / carriers[d_i]
        full.add_edge(d_i, d_j, weight=weight, highlighted=weight > threshold)

    present = [t for t in sorted(target_set) if t in full]
    keep: set[str] = set(present)
    for t in present:
        keep |= nx.ancestors(full, t)
    graph = full.subgraph(keep).copy()
    logger.info(
        "Progression pathways: %d codes, %d edges, %d above %.2f",
        graph.number_of_nodes(),
        graph.number_of_edges(),
        sum(1 for *_, h in graph.edges(data="highlighted") if h),
        threshold,
    )
    return PathwayGraph(graph=graph, targets=target_set, threshold=threshold)
