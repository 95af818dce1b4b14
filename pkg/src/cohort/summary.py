from __future__ import annotations

from collections import Counter
from typing import TYPE_CHECKING

from pydantic import BaseModel

from src.cohort.models import Label

if TYPE_CHECKING:
    from src.cohort.models import Cohort


class DiseaseShare(BaseModel):
    code: str
    patients: int
    percent: float


class CohortSummary(BaseModel):
    target: str
    patients: int
    cases: int
    controls: int
    universe_size: int
    admissions_histogram: dict[int, int]
    exclusions: dict[str, int]
    top_case_diseases: list[DiseaseShare]
    top_control_diseases: list[DiseaseShare]


def _top(cohort: Cohort, label: Label, k: int) -> list[DiseaseShare]:
    group = cohort.group(label)
    counts = Counter(code for p in group for code in p.diseases)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
    return [
        DiseaseShare(code=code, patients=n, percent=round(100.0 * n / len(group), 2))
        for code, n in ranked
    ]


def cohort_summary(cohort: Cohort, top_k: int = 10) -> CohortSummary:
    """Class balance, admission counts and the most prevalent diseases per class."""
    counts = cohort.class_counts()
    admissions = Counter(len(p.admissions) for p in cohort.patients)
    return CohortSummary(
        target=str(cohort.target),
        patients=cohort.size,
        cases=counts[str(Label.CASE)],
        controls=counts[str(Label.CONTROL)],
        universe_size=len(cohort.disease_universe),
        admissions_histogram=dict(sorted(admissions.items())),
        exclusions=dict(sorted(cohort.exclusions.items())),
        top_case_diseases=_top(cohort, Label.CASE, top_k),
        top_control_diseases=_top(cohort, Label.CONTROL, top_k),
    )
