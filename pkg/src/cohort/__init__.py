from src.cohort.inclusion import apply_inclusion_rules
from src.cohort.loader import load_cohort, read_records, write_cohort
from src.cohort.models import Admission, Cohort, DiseaseCode, Label, PatientRecord, parse_code
from src.cohort.summary import CohortSummary, cohort_summary
from src.cohort.synthetic import generate_synthetic_cohort

__all__ = [
    "Admission",
    "Cohort",
    "CohortSummary",
    "DiseaseCode",
    "Label",
    "PatientRecord",
    "apply_inclusion_rules",
    "cohort_summary",
    "generate_synthetic_cohort",
    "load_cohort",
    "parse_code",
    "read_records",
    "write_cohort",
]
