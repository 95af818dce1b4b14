"""Per-patient scores against the differential disease network.

A patient's network is the complete graph over the diseases they were ever
diagnosed with. Each score is a mean of DDN lookups over that network: node
weights, edge weights or PageRank values, with 0 for anything the DDN lacks.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import TYPE_CHECKING

from src.errors import EmptyPatientNetworkError

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator

    from src.cohort.models import DiseaseCode, PatientRecord
    from src.networks.comorbidity import DifferentialNetwork


@dataclass(frozen=True)
class PatientNetworkPN:
    nodes: frozenset[DiseaseCode]

    @classmethod
    def of(cls, patient: PatientRecord) -> PatientNetworkPN:
        return cls(nodes=patient.diseases)

    @classmethod
    def from_codes(cls, codes: Iterable[DiseaseCode]) -> PatientNetworkPN:
        return cls(nodes=frozenset(codes))

    @property
    def edge_count(self) -> int:
        return comb(len(self.nodes), 2)

    def edges(self) -> Iterator[tuple[DiseaseCode, DiseaseCode]]:
        return combinations(sorted(self.nodes), 2)


@dataclass(frozen=True)
class FeatureTriple:
    f_n: float
    f_e: float
    f_r: float

    def as_tuple(self) -> tuple[float, float, float]:
        return self.f_n, self.f_e, self.f_r


def _require_nodes(pn: PatientNetworkPN) -> None:
    if not pn.nodes:
        raise EmptyPatientNetworkError("Patient network has no diseases")


def node_score(pn: PatientNetworkPN, ddn: DifferentialNetwork) -> float:
    _require_nodes(pn)
    return sum(ddn.node_weight(d) for d in pn.nodes) / len(pn.nodes)


def edge_score(pn: PatientNetworkPN, ddn: DifferentialNetwork) -> float:
    """Mean DDN edge weight over the patient's disease pairs; 0 below two diseases."""
    if len(pn.nodes) < 2:
        return 0.0
    return sum(ddn.edge_weight(a, b) for a, b in pn.edges()) / pn.edge_count


def rank_score(pn: PatientNetworkPN, ddn: DifferentialNetwork) -> float:
    _require_nodes(pn)
    return sum(ddn.rank(d) for d in pn.nodes) / len(pn.nodes)


def feature_triple(pn: PatientNetworkPN, ddn: DifferentialNetwork) -> FeatureTriple:
    return FeatureTriple(
        f_n=node_score(pn, ddn), f_e=edge_score(pn, ddn), f_r=rank_score(pn, ddn)
    )
