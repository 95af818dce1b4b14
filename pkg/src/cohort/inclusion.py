from __future__ import annotations

import logging
from collections import Counter
from typing import TYPE_CHECKING

from src.cohort.models import Cohort, Label, PatientRecord
from src.config.run_config import CodeRanges, Target
from src.errors import DegenerateCohortError

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable

logger = logging.getLogger(__name__)

TOO_FEW_ADMISSIONS = "too_few_admissions"
NO_HYPERTENSION = "no_hypertension"
TARGET_NOT_AFTER_HYPERTENSION = "target_not_after_hypertension"


def _first_matching(record: PatientRecord, predicate: Callable[[str], bool]) -> int | None:
    for admission in record.admissions:
        if any(predicate(code) for code in admission.codes):
            return admission.seq
    return None


def classify(record: PatientRecord, target: Target, ranges: CodeRanges) -> Label | str:
    """Return the record's label, or the exclusion reason when it is excluded."""
    if len(record.admissions) < 2:
        return TOO_FEW_ADMISSIONS
    first_htn = _first_matching(record, ranges.is_hypertension)
    if first_htn is None:
        return NO_HYPERTENSION
    first_target = _first_matching(record, lambda c: ranges.is_target(c, target))
    if first_target is None:
        return Label.CONTROL
    # same-admission co-diagnosis carries no ordering and is excluded
    if first_htn < first_target:
        return Label.CASE
    return TARGET_NOT_AFTER_HYPERTENSION


def apply_inclusion_rules(
    raw: Iterable[PatientRecord],
    target: Target,
    ranges: CodeRanges | None = None,
    prior_exclusions: dict[str, int] | None = None,
) -> Cohort:
    """Label hypertension-first patients as cases and target-free ones as controls.

    Args:
        raw: Records with full admission order; any existing label is replaced.
        target: Disease whose onset after hypertension defines a case.
        ranges: ICD-10 category ranges for hypertension and targets.
        prior_exclusions: Exclusion counts from an earlier stage to carry forward.

    Raises:
        DegenerateCohortError: If no patient survives or a class ends up empty.
    """
    ranges = ranges or CodeRanges()
    kept: list[PatientRecord] = []
    exclusions: Counter[str] = Counter(prior_exclusions or {})
    for record in raw:
        outcome = classify(record, target, ranges)
        if isinstance(outcome, Label):
            kept.append(record.with_label(outcome))
        else:
            exclusions[outcome] += 1

    labels = Counter(p.label for p in kept)
    if not labels[Label.CASE] or not labels[Label.CONTROL]:
        raise DegenerateCohortError(
            f"Inclusion rules left {labels[Label.CASE]} cases and "
            f"{labels[Label.CONTROL]} controls for target {target}"
        )
    logger.info(
        "Included %d cases, %d controls; excluded %s",
        labels[Label.CASE],
        labels[Label.CONTROL],
        dict(exclusions) or "none",
    )
    return Cohort(target=target, patients=tuple(kept), exclusions=dict(exclusions))
