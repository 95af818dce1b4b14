from __future__ import annotations

import json
import logging
from collections import Counter
from pathlib import Path
from typing import Any, Literal

import pandas as pd

from src.cohort.inclusion import TOO_FEW_ADMISSIONS, apply_inclusion_rules
from src.cohort.models import Admission, Cohort, Label, PatientRecord, parse_code
from src.config.run_config import CodeRanges, Target
from src.errors import CohortParseError, DuplicatePatientIdError

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("id", "admission_seq", "code")


def _parse_label(raw: Any, line: int) -> Label:
    try:
        return Label(str(raw).strip().lower())
    except ValueError:
        raise CohortParseError(f"Unknown label '{raw}'", line=line)


def _parse_json_row(text: str, line: int) -> PatientRecord:
    try:
        row = json.loads(text)
    except json.JSONDecodeError as e:
        raise CohortParseError(f"Malformed JSON ({e.msg})", line=line)
    if not isinstance(row, dict) or "id" not in row or "admissions" not in row:
        raise CohortParseError("Expected an object with 'id' and 'admissions'", line=line)
    admissions_raw = row["admissions"]
    if not isinstance(admissions_raw, list):
        raise CohortParseError("'admissions' must be a list of code lists", line=line)
    admissions = []
    for seq, codes in enumerate(admissions_raw, start=1):
        if not isinstance(codes, list) or not codes:
            raise CohortParseError(f"Admission {seq} must be a nonempty list of codes", line=line)
        try:
            admissions.append(Admission(seq=seq, codes=frozenset(parse_code(c) for c in codes)))
        except CohortParseError as e:
            raise CohortParseError(e.message, line=line)
    label = _parse_label(row["label"], line) if row.get("label") is not None else None
    return PatientRecord(id=str(row["id"]), admissions=tuple(admissions), label=label)


def _read_jsonl(path: Path) -> list[PatientRecord]:
    records: list[PatientRecord] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as f:
        for line_no, text in enumerate(f, start=1):
            if not text.strip():
                continue
            record = _parse_json_row(text, line_no)
            if record.id in seen:
                raise DuplicatePatientIdError(record.id)
            seen.add(record.id)
            records.append(record)
    return records


def _read_csv(path: Path) -> list[PatientRecord]:
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = [c for c in CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise CohortParseError(f"CSV is missing columns {missing}", line=1)
    has_label = "label" in frame.columns
    by_patient: dict[str, dict[int, set[str]]] = {}
    labels: dict[str, Label] = {}
    for row_no, row in enumerate(frame.itertuples(index=False), start=2):
        try:
            seq = int(row.admission_seq)
        except ValueError:
            raise CohortParseError(f"Bad admission_seq '{row.admission_seq}'", line=row_no)
        try:
            code = parse_code(row.code)
        except CohortParseError as e:
            raise CohortParseError(e.message, line=row_no)
        by_patient.setdefault(row.id, {}).setdefault(seq, set()).add(code)
        if has_label and row.label:
            labels[row.id] = _parse_label(row.label, row_no)

    records = []
    for patient_id, admissions in by_patient.items():
        # ordinals are renumbered densely so gaps in the source do not matter
        ordered = [
            Admission(seq=i, codes=frozenset(admissions[s]))
            for i, s in enumerate(sorted(admissions), start=1)
        ]
        records.append(
            PatientRecord(id=patient_id, admissions=tuple(ordered), label=labels.get(patient_id))
        )
    return records


def read_records(path: Path, fmt: Literal["jsonl", "csv"] | None = None) -> list[PatientRecord]:
    """Parse raw patient records without applying any inclusion rule."""
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "jsonl")
    return _read_csv(path) if fmt == "csv" else _read_jsonl(path)


def load_cohort(
    path: Path,
    target: Target,
    ranges: CodeRanges | None = None,
    fmt: Literal["jsonl", "csv"] | None = None,
) -> Cohort:
    """Load and validate a cohort file.

    Records with fewer than two admissions are dropped and counted. When every
    remaining record carries a label it is kept as given; otherwise labels are
    derived with :func:`apply_inclusion_rules`.
    """
    records = read_records(Path(path), fmt)
    kept = [r for r in records if len(r.admissions) >= 2]
    exclusions = Counter({TOO_FEW_ADMISSIONS: len(records) - len(kept)})
    if exclusions[TOO_FEW_ADMISSIONS]:
        logger.warning(
            "Rejected %d record(s) with fewer than two admissions",
            exclusions[TOO_FEW_ADMISSIONS],
        )

    if kept and all(r.label is not None for r in kept):
        cohort = Cohort(target=target, patients=tuple(kept), exclusions=dict(+exclusions))
    else:
        cohort = apply_inclusion_rules(kept, target, ranges, prior_exclusions=dict(+exclusions))
    logger.info(
        "Loaded cohort of %d patients over %d codes", cohort.size, len(cohort.disease_universe)
    )
    return cohort


def write_cohort(cohort: Cohort, path: Path) -> Path:
    """Write the cohort as JSON lines that :func:`load_cohort` reads back."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for patient in cohort.patients:
        row = {
            "id": patient.id,
            "label": str(patient.label) if patient.label else None,
            "admissions": [sorted(a.codes) for a in patient.admissions],
        }
        lines.append(json.dumps(row, separators=(",", ":")))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
