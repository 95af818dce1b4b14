from __future__ import annotations

import json

import numpy as np
import pytest
from sklearn.linear_model import LogisticRegression

from src.cohort.models import Admission, Cohort, PatientRecord
from src.cohort.synthetic import generate_synthetic_cohort
from src.config.run_config import (
    CgrlConfig,
    HyperParams,
    NetworkConfig,
    RunConfig,
    SyntheticCohortSpec,
    Target,
)
from src.errors import NonSeparableSpecWarning, TrainingDivergedError
from src.networks.patient import build_patient_graph
from src.training import experiment
from src.training.experiment import (
    MetricSummary,
    PreparedRun,
    RunEntry,
    RunReport,
    prepare_run,
    run_experiment,
    target_exclusion,
)
from src.training.trainer import TrainResult


def _poisoned(patient: PatientRecord) -> PatientRecord:
    last = patient.admissions[-1]
    admissions = (*patient.admissions[:-1], Admission(last.seq, last.codes | {"Z99", "K76"}))
    return PatientRecord(id=patient.id, admissions=admissions, label=patient.label)


@pytest.fixture
def cohort(tiny_run_config: RunConfig) -> Cohort:
    assert tiny_run_config.synthetic is not None
    return generate_synthetic_cohort(tiny_run_config.synthetic, seed=0)


class TestMetricSummary:
    def test_sample_std(self) -> None:
        summary = MetricSummary.of([0.8, 0.9, 1.0])
        assert summary.mean == pytest.approx(0.9)
        assert summary.std == pytest.approx(0.1)
        assert summary.n == 3
        assert summary.format() == "0.9000±0.1000"

    def test_single_value_has_zero_std(self) -> None:
        assert MetricSummary.of([0.75]).std == 0.0

    def test_empty(self) -> None:
        summary = MetricSummary.of([])
        assert summary.n == 0
        assert summary.format() == "n/a"


class TestRunReport:
    def test_failed_runs_excluded_from_summary(self) -> None:
        report = RunReport(
            target=Target.DM,
            runs=3,
            base_seed=0,
            f1_average="macro",
            hyper=HyperParams(),
            model=CgrlConfig(),
            entries=[
                RunEntry(run=0, seed=0, acc=0.8, f1=0.7, ablation_acc=0.6, ablation_f1=0.5),
                RunEntry(run=1, seed=1, status="failed", error="TrainingDivergedError: nan"),
                RunEntry(run=2, seed=2, acc=0.9, f1=0.8, ablation_acc=0.7, ablation_f1=0.6),
            ],
        )
        report.summarize()
        assert [e.seed for e in report.failed] == [1]
        assert report.cgrl["acc"].n == 2
        assert report.cgrl["acc"].mean == pytest.approx(0.85)
        assert report.ablation["f1"].mean == pytest.approx(0.55)
        data = json.loads(report.to_json())
        assert data["cgrl"]["acc"]["std_kind"] == "sample"
        assert data["entries"][1]["status"] == "failed"


class TestPrepareRun:
    def test_pieces_line_up(self, cohort: Cohort, tiny_run_config: RunConfig) -> None:
        prepared = prepare_run(cohort, tiny_run_config, seed=7)
        z = cohort.size
        assert prepared.prior_ids == ()
        assert prepared.features.shape[0] == z
        assert prepared.adjacency.shape == (z, z)
        assert prepared.structural.c.shape == (z, z)
        assert prepared.inputs.num_nodes == z
        assert len(prepared.plan.train_idx) == 36

    def test_planted_codes_rank_high_in_ddn(
        self, cohort: Cohort, tiny_run_config: RunConfig
    ) -> None:
        prepared = prepare_run(cohort, tiny_run_config, seed=7)
        assert tiny_run_config.synthetic is not None
        planted = set(tiny_run_config.synthetic.planted_codes)
        top = {code for code, _ in prepared.ddn.top_nodes(len(planted) + 1)}
        assert len(planted & top) >= len(planted) - 1

    def test_test_rows_never_reach_ddn_or_scaler(
        self, cohort: Cohort, tiny_run_config: RunConfig
    ) -> None:
        clean = prepare_run(cohort, tiny_run_config, seed=7)
        held_out = set(clean.plan.test_idx) | set(clean.plan.val_idx)
        patients = tuple(
            _poisoned(p) if i in held_out else p for i, p in enumerate(cohort.patients)
        )
        poisoned = prepare_run(Cohort(target=cohort.target, patients=patients), tiny_run_config, 7)

        assert poisoned.plan == clean.plan
        assert poisoned.ddn.nodes == clean.ddn.nodes
        assert poisoned.ddn.edges == clean.ddn.edges
        np.testing.assert_array_equal(poisoned.features.mean, clean.features.mean)
        np.testing.assert_array_equal(poisoned.features.scale, clean.features.scale)
        assert "Z99" not in poisoned.ddn.node_set

    def test_prior_fraction_carves_out_patients(
        self, cohort: Cohort, tiny_run_config: RunConfig
    ) -> None:
        config = tiny_run_config.model_copy(
            update={"network": NetworkConfig(ddn_prior_fraction=0.25)}
        )
        prepared = prepare_run(cohort, config, seed=7)
        modeled = {p.id for p in prepared.cohort.patients}
        assert len(prepared.prior_ids) == 15
        assert prepared.cohort.size == 45
        assert modeled.isdisjoint(prepared.prior_ids)


class TestTargetExclusion:
    def test_target_range_codes_found(self, cohort: Cohort, tiny_run_config: RunConfig) -> None:
        assert target_exclusion(cohort, tiny_run_config) == frozenset({"E11"})

    def test_target_code_absent_from_model_inputs(
        self, cohort: Cohort, tiny_run_config: RunConfig
    ) -> None:
        prepared = prepare_run(cohort, tiny_run_config, seed=7)
        assert "E11" in cohort.disease_universe
        assert "E11" not in prepared.features.columns
        assert "E11" not in prepared.ddn.node_set
        assert prepared.features.shape[1] == len(cohort.disease_universe) - 1 + 3
        expected = build_patient_graph(
            prepared.cohort, tiny_run_config.network.theta, frozenset({"E11"})
        )
        assert prepared.patient_graph.edges == expected.edges

    def test_no_planted_signal_scores_at_chance(self, tiny_run_config: RunConfig) -> None:
        spec = SyntheticCohortSpec(target=Target.DM, n_patients=1024, p_case=0.0, p_base=0.0)
        with pytest.warns(NonSeparableSpecWarning):
            blank = generate_synthetic_cohort(spec, seed=5)

        prepared = prepare_run(blank, tiny_run_config, seed=5)
        labels = np.asarray(prepared.cohort.labels)
        train, test = list(prepared.plan.train_idx), list(prepared.plan.test_idx)
        values = prepared.features.values
        for columns in (slice(-3, None), slice(None)):
            oracle = LogisticRegression(max_iter=1000).fit(values[train, columns], labels[train])
            assert oracle.score(values[test, columns], labels[test]) < 0.65


class TestRunExperiment:
    def test_paired_runs(self, cohort: Cohort, tiny_run_config: RunConfig) -> None:
        calls: list[tuple[int, TrainResult, TrainResult]] = []

        def record(prepared: PreparedRun, result: TrainResult, ablated: TrainResult) -> None:
            calls.append((prepared.seed, result, ablated))

        report = run_experiment(cohort, tiny_run_config, on_run=record)
        assert [e.seed for e in report.entries] == [7, 8]
        assert all(e.status == "ok" for e in report.entries)
        assert [seed for seed, _, _ in calls] == [7, 8]
        for _, result, ablated in calls:
            assert not result.model.config.ablation
            assert ablated.model.config.ablation
        assert report.cgrl["acc"].n == 2
        assert report.ablation["acc"].n == 2

    def test_single_run_has_zero_std(self, cohort: Cohort, tiny_run_config: RunConfig) -> None:
        report = run_experiment(cohort, tiny_run_config, runs=1, base_seed=3)
        assert report.entries[0].seed == 3
        assert report.cgrl["acc"].std == 0.0
        assert report.cgrl["f1"].std == 0.0

    def test_failed_run_is_recorded(
        self, cohort: Cohort, tiny_run_config: RunConfig, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        real_train = experiment.train

        def flaky_train(inputs, plan, config, hyper, seed, event_log=None):
            if seed == 8:
                raise TrainingDivergedError(3, float("nan"))
            return real_train(inputs, plan, config, hyper, seed, event_log)

        monkeypatch.setattr(experiment, "train", flaky_train)
        report = run_experiment(cohort, tiny_run_config)
        assert [e.status for e in report.entries] == ["ok", "failed"]
        assert report.entries[1].error is not None
        assert report.entries[1].error.startswith("TrainingDivergedError")
        assert report.cgrl["acc"].n == 1

    def test_unexpected_error_fails_only_its_run(
        self, cohort: Cohort, tiny_run_config: RunConfig, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        real_train = experiment.train

        def broken_train(inputs, plan, config, hyper, seed, event_log=None):
            if seed == 7:
                raise RuntimeError("CUDA error: out of memory")
            return real_train(inputs, plan, config, hyper, seed, event_log)

        monkeypatch.setattr(experiment, "train", broken_train)
        report = run_experiment(cohort, tiny_run_config)
        assert [e.status for e in report.entries] == ["failed", "ok"]
        assert report.entries[0].error == "RuntimeError: CUDA error: out of memory"
        assert report.cgrl["acc"].n == 1

    def test_reuses_prepared_runs(self, cohort: Cohort, tiny_run_config: RunConfig) -> None:
        prepared = prepare_run(cohort, tiny_run_config, seed=7)
        seen: list[PreparedRun] = []
        run_experiment(
            cohort,
            tiny_run_config,
            runs=1,
            prepared_runs={7: prepared},
            on_run=lambda p, _r, _a: seen.append(p),
        )
        assert len(seen) == 1
        assert seen[0] is prepared

    def test_runs_must_be_positive(self, cohort: Cohort, tiny_run_config: RunConfig) -> None:
        with pytest.raises(ValueError):
            run_experiment(cohort, tiny_run_config, runs=0)


@pytest.mark.slow
class TestPlantedCohortLearning:
    def test_planted_structure_is_learned(self) -> None:
        profile = RunConfig.for_target(Target.DM)
        assert profile.synthetic is not None
        spec = profile.synthetic.model_copy(update={"p_case": 0.9, "p_base": 0.05})
        assert spec.n_patients == 1024
        config = profile.model_copy(
            update={
                "synthetic": spec,
                # every patient carries I10, so theta=1 would connect everyone
                "network": NetworkConfig(theta=2),
                # profile width 128 over 500 epochs takes far longer than five minutes on a CPU
                "model": profile.model.model_copy(update={"hidden": 16}),
                "hyper": profile.hyper.model_copy(update={"max_epochs": 200}),
                "runs": 5,
                "seed": 42,
            }
        )
        cohort = generate_synthetic_cohort(spec, seed=42)

        prepared = prepare_run(cohort, config, seed=42)
        network = prepared.features.values[:, -3:]
        labels = np.asarray(prepared.cohort.labels)
        train, test = list(prepared.plan.train_idx), list(prepared.plan.test_idx)
        oracle = LogisticRegression().fit(network[train], labels[train])
        assert oracle.score(network[test], labels[test]) >= 0.90

        report = run_experiment(cohort, config, prepared_runs={42: prepared})
        assert not report.failed
        cgrl_acc = report.cgrl["acc"].mean
        ablation_acc = report.ablation["acc"].mean
        assert cgrl_acc is not None and ablation_acc is not None
        assert "E11" not in prepared.features.columns
        assert cgrl_acc >= 0.90
        assert cgrl_acc >= ablation_acc
