"""Repeated split/train/evaluate runs with a paired feature-attention ablation."""

from __future__ import annotations

import logging
import statistics
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

import torch
from pydantic import BaseModel, Field

from src.cohort.models import Label
from src.config.run_config import CgrlConfig, HyperParams, Target
from src.features.matrix import FeatureMatrix, feature_matrix
from src.model.structural import StructuralIntervention, fit_structural_intervention
from src.networks.comorbidity import DifferentialNetwork, build_ddn
from src.networks.patient import PatientGraph, build_patient_graph, to_adjacency
from src.training.split import SplitPlan, stratified_partition, stratified_split
from src.training.trainer import GraphInputs, TrainResult, evaluate, train

if TYPE_CHECKING:
    import scipy.sparse as sp

    from src.cohort.models import Cohort, DiseaseCode
    from src.config.run_config import RunConfig
    from src.observability.run_log import RunEventLog

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PreparedRun:
    """Everything one seed's training run consumes, derived without test labels."""

    seed: int
    cohort: Cohort
    plan: SplitPlan
    prior_ids: tuple[str, ...]
    ddn: DifferentialNetwork
    features: FeatureMatrix
    patient_graph: PatientGraph
    adjacency: sp.csr_array
    structural: StructuralIntervention
    inputs: GraphInputs


def target_exclusion(cohort: Cohort, config: RunConfig) -> frozenset[DiseaseCode]:
    """Target-range codes in the cohort; every case carries one, so no model input may."""
    ranges = config.code_ranges
    return frozenset(c for c in cohort.disease_universe if ranges.is_target(c, cohort.target))


def prepare_run(
    cohort: Cohort, config: RunConfig, seed: int, dtype: torch.dtype = torch.float32
) -> PreparedRun:
    """Split the cohort and derive DDN, features, patient graph and C for one seed.

    With ``network.ddn_prior_fraction`` set, a stratified share of patients is
    held out as prior knowledge for the DDN and the remainder is split and
    modelled; otherwise the DDN comes from the training split alone.
    """
    prior_ids: tuple[str, ...] = ()
    fraction = config.network.ddn_prior_fraction
    if fraction is not None:
        prior, rest = stratified_partition(cohort.labels, (fraction, 1.0 - fraction), seed)
        prior_cohort = cohort.subset(prior)
        modeling = cohort.subset(rest)
        prior_ids = tuple(p.id for p in prior_cohort.patients)
        plan = stratified_split(modeling, config.split.ratios, seed)
        case_src, control_src = prior_cohort.group(Label.CASE), prior_cohort.group(Label.CONTROL)
    else:
        modeling = cohort
        plan = stratified_split(modeling, config.split.ratios, seed)
        train_part = modeling.subset(plan.train_idx)
        case_src, control_src = train_part.group(Label.CASE), train_part.group(Label.CONTROL)

    excluded = target_exclusion(cohort, config)
    ddn = build_ddn(
        case_src, control_src, config.network.beta, config.network.min_coco, exclude=excluded
    )
    features = feature_matrix(modeling, ddn, plan.train_idx, excluded)
    patient_graph = build_patient_graph(modeling, config.network.theta, excluded)
    adjacency = to_adjacency(patient_graph)
    model = config.model
    structural = fit_structural_intervention(
        adjacency,
        k=model.struct_rank,
        iters=model.struct_iters,
        lr=model.struct_lr,
        seed=seed,
        optimizer=model.struct_optimizer,
    )
    inputs = GraphInputs.build(features.values, adjacency, structural.c, modeling.labels, dtype)
    return PreparedRun(
        seed=seed,
        cohort=modeling,
        plan=plan,
        prior_ids=prior_ids,
        ddn=ddn,
        features=features,
        patient_graph=patient_graph,
        adjacency=adjacency,
        structural=structural,
        inputs=inputs,
    )


class RunEntry(BaseModel):
    run: int
    seed: int
    status: Literal["ok", "failed"] = "ok"
    acc: float | None = None
    f1: float | None = None
    ablation_acc: float | None = None
    ablation_f1: float | None = None
    best_epoch: int | None = None
    epochs: int | None = None
    error: str | None = None


class MetricSummary(BaseModel):
    """Mean and sample standard deviation over successful runs."""

    mean: float | None
    std: float | None
    n: int
    std_kind: Literal["sample"] = "sample"

    @classmethod
    def of(cls, values: list[float]) -> MetricSummary:
        if not values:
            return cls(mean=None, std=None, n=0)
        std = statistics.stdev(values) if len(values) > 1 else 0.0
        return cls(mean=statistics.fmean(values), std=std, n=len(values))

    def format(self) -> str:
        if self.mean is None or self.std is None:
            return "n/a"
        return f"{self.mean:.4f}±{self.std:.4f}"


class RunReport(BaseModel):
    target: Target
    runs: int
    base_seed: int
    f1_average: Literal["macro", "binary"]
    hyper: HyperParams
    model: CgrlConfig
    entries: list[RunEntry] = Field(default_factory=list)
    cgrl: dict[str, MetricSummary] = Field(default_factory=dict)
    ablation: dict[str, MetricSummary] = Field(default_factory=dict)

    @property
    def failed(self) -> list[RunEntry]:
        return [e for e in self.entries if e.status == "failed"]

    def summarize(self) -> None:
        ok = [e for e in self.entries if e.status == "ok"]
        self.cgrl = {
            "acc": MetricSummary.of([e.acc for e in ok if e.acc is not None]),
            "f1": MetricSummary.of([e.f1 for e in ok if e.f1 is not None]),
        }
        self.ablation = {
            "acc": MetricSummary.of([e.ablation_acc for e in ok if e.ablation_acc is not None]),
            "f1": MetricSummary.of([e.ablation_f1 for e in ok if e.ablation_f1 is not None]),
        }

    def to_json(self) -> str:
        return self.model_dump_json(indent=2) + "\n"


RunCallback = Callable[[PreparedRun, TrainResult, TrainResult], None]


def run_experiment(
    cohort: Cohort,
    config: RunConfig,
    runs: int | None = None,
    base_seed: int | None = None,
    event_log: RunEventLog | None = None,
    on_run: RunCallback | None = None,
    dtype: torch.dtype = torch.float32,
    prepared_runs: Mapping[int, PreparedRun] | None = None,
) -> RunReport:
    """Train and evaluate CGRL and its ablation under seeds ``base_seed + i``.

    A run that raises is recorded as failed with the exception type and message,
    and the remaining runs continue. ``on_run`` receives each successful run's
    inputs and both training results. Seeds found in ``prepared_runs`` reuse
    that preparation.
    """
    runs = config.runs if runs is None else runs
    base_seed = config.seed if base_seed is None else base_seed
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    hyper = config.hyper
    ablation_config = config.model.model_copy(update={"ablation": True})
    report = RunReport(
        target=config.target,
        runs=runs,
        base_seed=base_seed,
        f1_average=hyper.f1_average,
        hyper=hyper,
        model=config.model,
    )

    for i in range(runs):
        seed = base_seed + i
        try:
            cached = (prepared_runs or {}).get(seed)
            prepared = cached or prepare_run(cohort, config, seed, dtype)
            test_idx = prepared.plan.test_idx
            result = train(prepared.inputs, prepared.plan, config.model, hyper, seed, event_log)
            acc, f1 = evaluate(result.model, prepared.inputs, test_idx, hyper.f1_average)
            ablated = train(prepared.inputs, prepared.plan, ablation_config, hyper, seed, event_log)
            ab_acc, ab_f1 = evaluate(ablated.model, prepared.inputs, test_idx, hyper.f1_average)
        except Exception as e:
            logger.error("Run %d (seed %d) failed: %s: %s", i, seed, type(e).__name__, e)
            report.entries.append(
                RunEntry(run=i, seed=seed, status="failed", error=f"{type(e).__name__}: {e}")
            )
            continue

        logger.info(
            "Run %d (seed %d): acc %.4f f1 %.4f | ablation acc %.4f f1 %.4f",
            i, seed, acc, f1, ab_acc, ab_f1,
        )
        report.entries.append(
            RunEntry(
                run=i,
                seed=seed,
                acc=acc,
                f1=f1,
                ablation_acc=ab_acc,
                ablation_f1=ab_f1,
                best_epoch=result.best_epoch,
                epochs=result.epochs_run,
            )
        )
        if on_run is not None:
            on_run(prepared, result, ablated)

    report.summarize()
    return report
