import os
from collections.abc import Callable, Generator, Sequence
from pathlib import Path

import pytest

from src.cohort.models import Admission, Cohort, Label, PatientRecord
from src.config.run_config import (
    CgrlConfig,
    HyperParams,
    RunConfig,
    SyntheticCohortSpec,
    Target,
)

PatientFactory = Callable[..., PatientRecord]


@pytest.fixture
def clean_env() -> Generator[None, None, None]:
    from src.config import settings as settings_module

    settings_module._settings = None
    original_env = os.environ.copy()
    for key in [k for k in os.environ if k.startswith("COMORBINET_")]:
        del os.environ[key]
    yield
    os.environ.clear()
    os.environ.update(original_env)
    settings_module._settings = None


def _patient(
    pid: str, admissions: Sequence[Sequence[str]], label: Label | str | None = None
) -> PatientRecord:
    return PatientRecord(
        id=pid,
        admissions=tuple(
            Admission(seq=i, codes=frozenset(codes)) for i, codes in enumerate(admissions, start=1)
        ),
        label=Label(label) if label is not None else None,
    )


@pytest.fixture
def make_patient() -> PatientFactory:
    """Build a record from admission code lists: ``make_patient("p1", [["I10"], ["E11"]])``."""
    return _patient


@pytest.fixture
def small_cohort() -> Cohort:
    """Twelve labeled DM patients; cases share E78/K76, controls share J44/M17."""
    cases = [
        _patient("c01", [["I10"], ["E78", "K76"], ["E11"]], "case"),
        _patient("c02", [["I10", "E78"], ["K76", "E11"]], "case"),
        _patient("c03", [["I10"], ["K76"], ["E11", "E78"]], "case"),
        _patient("c04", [["I10", "K76"], ["E11"]], "case"),
        _patient("c05", [["I10"], ["E78", "E11"]], "case"),
        _patient("c06", [["I10", "E78", "K76"], ["E11", "N40"]], "case"),
    ]
    controls = [
        _patient("n01", [["I10"], ["J44"]], "control"),
        _patient("n02", [["I10", "M17"], ["J44"]], "control"),
        _patient("n03", [["I10"], ["M17"], ["E78"]], "control"),
        _patient("n04", [["I10", "J44"], ["M17"]], "control"),
        _patient("n05", [["I10"], ["N40"]], "control"),
        _patient("n06", [["I10", "J44", "M17"], ["I10"]], "control"),
    ]
    return Cohort(target=Target.DM, patients=tuple(cases + controls))


@pytest.fixture
def tiny_spec() -> SyntheticCohortSpec:
    return SyntheticCohortSpec(
        target=Target.DM, n_patients=60, universe_size=16, p_case=0.9, p_base=0.05
    )


@pytest.fixture
def tiny_run_config(tiny_spec: SyntheticCohortSpec, tmp_path: Path) -> RunConfig:
    return RunConfig(
        target=Target.DM,
        synthetic=tiny_spec,
        model=CgrlConfig(hidden=4, heads=2, struct_rank=4, struct_iters=20),
        hyper=HyperParams(max_epochs=15, patience=5, log_every=5),
        runs=2,
        seed=7,
        out=tmp_path / "run",
    )


@pytest.fixture
def temp_data_path(tmp_path: Path) -> Path:
    data_path = tmp_path / "data"
    data_path.mkdir(parents=True, exist_ok=True)
    return data_path
