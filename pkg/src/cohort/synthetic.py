"""Seeded synthetic cohorts with planted comorbidity structure.

Every patient starts with essential hypertension (I10) at admission 1. Cases
receive the target code at their last admission, planted cluster codes with
probability ``p_case`` and, optionally, an ordered progression chain placed at
consecutive admissions. Controls never carry a target code and draw planted
codes at ``p_base``. All other codes are background noise shared by both groups.
"""

from __future__ import annotations

import logging
import warnings

import numpy as np

from src.cohort.models import Admission, Cohort, DiseaseCode, Label, PatientRecord
from src.config.run_config import CodeRanges, SyntheticCohortSpec
from src.errors import NonSeparableSpecWarning

logger = logging.getLogger(__name__)

HYPERTENSION_CODE = DiseaseCode("I10")

# Common inpatient categories used as background diagnoses, in a fixed order.
BACKGROUND_POOL: tuple[str, ...] = (
    "E78", "K21", "J44", "M17", "N40", "H35", "E03", "K29", "I48", "I50",
    "I63", "I67", "I70", "N18", "H25", "I51", "K76", "J18", "K80", "M54",
    "E66", "G47", "F32", "K57", "D64", "N39", "J45", "M81", "I83", "L40",
    "K44", "H40", "G20", "E87", "R51", "K59", "M19", "N20", "J30", "B18",
)


def _background_codes(spec: SyntheticCohortSpec, reserved: set[str]) -> list[DiseaseCode]:
    ranges = CodeRanges()
    budget = spec.universe_size - len(reserved)
    pool = [
        c
        for c in BACKGROUND_POOL
        if c not in reserved
        and not ranges.is_hypertension(c)
        and not ranges.is_target(c, spec.target)
    ]
    filler = (f"Q{i:02d}" for i in range(100))
    while len(pool) < budget:
        pool.append(next(filler))
    return [DiseaseCode(c) for c in pool[: max(budget, 0)]]


def _place(rng: np.random.Generator, admissions: list[set[DiseaseCode]], code: DiseaseCode) -> None:
    admissions[int(rng.integers(0, len(admissions)))].add(code)


def generate_synthetic_cohort(spec: SyntheticCohortSpec, seed: int) -> Cohort:
    """Generate a labeled cohort; identical ``(spec, seed)`` gives identical output."""
    if spec.p_case <= spec.p_base:
        message = (
            f"p_case={spec.p_case} does not exceed p_base={spec.p_base}; "
            "planted clusters will not separate cases from controls"
        )
        logger.warning(message)
        warnings.warn(message, NonSeparableSpecWarning, stacklevel=2)

    target_code = DiseaseCode(spec.resolved_target_code)
    planted = [DiseaseCode(c) for c in spec.planted_codes]
    chain = [DiseaseCode(c) for c in spec.progression]
    reserved = {HYPERTENSION_CODE, target_code, *planted, *chain}
    background = _background_codes(spec, reserved)

    rng = np.random.default_rng(seed)
    n_cases = max(1, min(spec.n_patients - 1, round(spec.n_patients * spec.case_fraction)))
    is_case = np.zeros(spec.n_patients, dtype=bool)
    is_case[rng.permutation(spec.n_patients)[:n_cases]] = True

    patients: list[PatientRecord] = []
    for idx in range(spec.n_patients):
        case = bool(is_case[idx])
        lo_adm = spec.min_admissions
        if case and chain:
            lo_adm = max(lo_adm, len(chain) + 1)
        n_adm = int(rng.integers(lo_adm, max(lo_adm, spec.max_admissions) + 1))
        admissions: list[set[DiseaseCode]] = [set() for _ in range(n_adm)]
        admissions[0].add(HYPERTENSION_CODE)

        if case:
            admissions[-1].add(target_code)
            if chain:
                # chain[i] sits at admission i (0-based), continuing with progression_rate
                admissions[0].add(chain[0])
                for step, code in enumerate(chain[1:], start=1):
                    if rng.random() >= spec.progression_rate:
                        break
                    admissions[step].add(code)

        rate = spec.p_case if case else spec.p_base
        for code in planted:
            if rng.random() < rate:
                _place(rng, admissions, code)
        for code in background:
            if rng.random() < spec.background_rate:
                _place(rng, admissions, code)

        for adm in admissions[1:]:
            if not adm:
                adm.add(HYPERTENSION_CODE)  # follow-up stay coded with the chronic condition
        patients.append(
            PatientRecord(
                id=f"p{idx:05d}",
                admissions=tuple(
                    Admission(seq=i, codes=frozenset(codes))
                    for i, codes in enumerate(admissions, start=1)
                ),
                label=Label.CASE if case else Label.CONTROL,
            )
        )

    cohort = Cohort(target=spec.target, patients=tuple(patients))
    logger.info(
        "Generated synthetic %s cohort: %d patients (%d cases), %d codes, seed %d",
        spec.target,
        cohort.size,
        n_cases,
        len(cohort.disease_universe),
        seed,
    )
    return cohort
