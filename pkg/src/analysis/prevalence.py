from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import TYPE_CHECKING

import pandas as pd
from pydantic import BaseModel, Field

from src.errors import EmptyPopulationError
from src.networks.comorbidity import DEFAULT_BETA, build_disease_graph

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from src.cohort.models import DiseaseCode, PatientRecord


class PrevalenceRow(BaseModel):
    disease: str
    prevalence_case: float = Field(ge=0.0, le=1.0)
    prevalence_control: float = Field(ge=0.0, le=1.0)
    difference: float


class PrevalenceComparison(BaseModel):
    """Per-disease prevalence in both groups, sorted by descending case prevalence."""

    case_size: int
    control_size: int
    rows: list[PrevalenceRow]

    def row(self, disease: str) -> PrevalenceRow:
        for r in self.rows:
            if r.disease == disease:
                return r
        raise KeyError(disease)

    def top_differences(self, k: int) -> list[PrevalenceRow]:
        return sorted(self.rows, key=lambda r: (-r.difference, r.disease))[:k]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.model_dump() for r in self.rows])

    def to_csv(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.10g")
        return path


def _require(group: Sequence[PatientRecord], name: str) -> None:
    if not group:
        raise EmptyPopulationError(f"{name} group is empty")


def _shares(group: Sequence[PatientRecord]) -> Counter[str]:
    counts: Counter[str] = Counter()
    for patient in group:
        counts.update(patient.diseases)
    return counts


def compare_prevalence(
    case_group: Sequence[PatientRecord], control_group: Sequence[PatientRecord]
) -> PrevalenceComparison:
    """Full prevalence table over every disease seen in either group."""
    _require(case_group, "Case")
    _require(control_group, "Control")
    case_counts = _shares(case_group)
    control_counts = _shares(control_group)
    rows = []
    for disease in sorted(set(case_counts) | set(control_counts)):
        pr_case = case_counts[disease] / len(case_group)
        pr_control = control_counts[disease] / len(control_group)
        rows.append(
            PrevalenceRow(
                disease=disease,
                prevalence_case=pr_case,
                prevalence_control=pr_control,
                difference=pr_case - pr_control,
            )
        )
    rows.sort(key=lambda r: (-r.prevalence_case, r.disease))
    return PrevalenceComparison(
        case_size=len(case_group), control_size=len(control_group), rows=rows
    )


def pair_ratio(group: Sequence[PatientRecord], d_i: DiseaseCode, d_j: DiseaseCode) -> float:
    """Share of the group carrying both ``d_i`` and ``d_j`` (joint prevalence)."""
    _require(group, "Patient")
    return sum(d_i in p.diseases and d_j in p.diseases for p in group) / len(group)


class PairRatioRow(BaseModel):
    d_i: str
    d_j: str
    ratio_case: float = Field(ge=0.0, le=1.0)
    ratio_control: float = Field(ge=0.0, le=1.0)
    difference: float


def compare_pair_ratios(
    case_group: Sequence[PatientRecord],
    control_group: Sequence[PatientRecord],
    pairs: Iterable[tuple[DiseaseCode, DiseaseCode]] | None = None,
    top_k: int = 10,
    beta: float = DEFAULT_BETA,
) -> list[PairRatioRow]:
    """Joint prevalence of disease pairs in cases and controls.

    Without explicit ``pairs`` the ``top_k`` strongest COCO edges of the case
    group are compared.
    """
    _require(case_group, "Case")
    _require(control_group, "Control")
    if pairs is None:
        graph = build_disease_graph(case_group, beta)
        ranked = sorted(graph.edges.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
        pairs = [pair for pair, _ in ranked]
    rows = []
    for d_i, d_j in pairs:
        case = pair_ratio(case_group, d_i, d_j)
        control = pair_ratio(control_group, d_i, d_j)
        rows.append(
            PairRatioRow(
                d_i=d_i, d_j=d_j, ratio_case=case, ratio_control=control, difference=case - control
            )
        )
    return rows


def write_pair_ratios(rows: Sequence[PairRatioRow], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        [r.model_dump() for r in rows],
        columns=["d_i", "d_j", "ratio_case", "ratio_control", "difference"],
    )
    frame.to_csv(path, index=False, float_format="%.10g")
    return path
