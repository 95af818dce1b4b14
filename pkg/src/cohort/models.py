from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property
from typing import NewType

from src.config.run_config import CODE_PATTERN, Target
from src.errors import CohortParseError, DegenerateCohortError, DuplicatePatientIdError

DiseaseCode = NewType("DiseaseCode", str)


def parse_code(raw: str) -> DiseaseCode:
    """Normalize a raw ICD-10 code to its three-character category.

    Longer codes such as ``I25.10`` or ``I251`` are truncated to ``I25``.
    """
    code = raw.strip().upper().replace(".", "")[:3]
    if not CODE_PATTERN.match(code):
        raise CohortParseError(f"Invalid ICD-10 code '{raw}'")
    return DiseaseCode(code)


class Label(StrEnum):
    CASE = "case"
    CONTROL = "control"


@dataclass(frozen=True)
class Admission:
    """One hospital stay; ``seq`` is the 1-based admission ordinal."""

    seq: int
    codes: frozenset[DiseaseCode]

    def __post_init__(self) -> None:
        if self.seq < 1:
            raise CohortParseError(f"Admission ordinal must be >= 1, got {self.seq}")
        if not self.codes:
            raise CohortParseError(f"Admission {self.seq} has no diagnosis codes")


@dataclass(frozen=True)
class PatientRecord:
    id: str
    admissions: tuple[Admission, ...]
    label: Label | None = None

    @cached_property
    def diseases(self) -> frozenset[DiseaseCode]:
        """Union of codes over all admissions."""
        return frozenset().union(*(a.codes for a in self.admissions))

    def first_seq(self, code: DiseaseCode) -> int | None:
        for admission in self.admissions:
            if code in admission.codes:
                return admission.seq
        return None

    def last_seq(self, code: DiseaseCode) -> int | None:
        for admission in reversed(self.admissions):
            if code in admission.codes:
                return admission.seq
        return None

    def with_label(self, label: Label) -> PatientRecord:
        return PatientRecord(id=self.id, admissions=self.admissions, label=label)


@dataclass(frozen=True)
class Cohort:
    target: Target
    patients: tuple[PatientRecord, ...]
    disease_universe: tuple[DiseaseCode, ...] = ()
    exclusions: dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.disease_universe:
            universe = sorted(set().union(*(p.diseases for p in self.patients)))
            object.__setattr__(self, "disease_universe", tuple(universe))
        self.validate()

    def validate(self) -> None:
        """Check every cohort invariant; safe to call repeatedly."""
        if not self.patients:
            raise DegenerateCohortError("Cohort has no patients")
        seen: set[str] = set()
        universe = set(self.disease_universe)
        for patient in self.patients:
            if patient.id in seen:
                raise DuplicatePatientIdError(patient.id)
            seen.add(patient.id)
            if len(patient.admissions) < 2:
                raise DegenerateCohortError(f"Patient '{patient.id}' has fewer than 2 admissions")
            if patient.label is None:
                raise DegenerateCohortError(f"Patient '{patient.id}' is unlabeled")
            missing = patient.diseases - universe
            if missing:
                raise DegenerateCohortError(
                    f"Codes {sorted(missing)} of patient '{patient.id}' missing from universe"
                )
        if list(self.disease_universe) != sorted(universe):
            raise DegenerateCohortError("Disease universe must be sorted and duplicate-free")
        labels = {p.label for p in self.patients}
        if labels != {Label.CASE, Label.CONTROL}:
            raise DegenerateCohortError(f"Cohort needs both classes, found {sorted(labels)}")

    @property
    def size(self) -> int:
        return len(self.patients)

    @cached_property
    def labels(self) -> tuple[int, ...]:
        """1 for case, 0 for control, in patient order."""
        return tuple(int(p.label is Label.CASE) for p in self.patients)

    def group(self, label: Label) -> list[PatientRecord]:
        return [p for p in self.patients if p.label is label]

    def subset(self, indices: list[int] | tuple[int, ...]) -> Cohort:
        """Cohort over the given patient positions, keeping the same universe."""
        return Cohort(
            target=self.target,
            patients=tuple(self.patients[i] for i in indices),
            disease_universe=self.disease_universe,
        )

    def class_counts(self) -> Counter[str]:
        return Counter(str(p.label) for p in self.patients)
