"""Stage-by-stage orchestration of a full run into a run directory.

Stages run in a fixed order; each CLI subcommand executes the subset it
needs. A failing stage leaves everything written so far in
place, drops a FAILED marker and raises :class:`StageFailedError`.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import TYPE_CHECKING, Literal

import numpy as np
import torch

from src.analysis import (
    compare_pair_ratios,
    compare_prevalence,
    high_risk_clusters,
    progression_pathways,
    weight_percentile,
    write_pair_ratios,
)
from src.cohort import (
    Cohort,
    Label,
    cohort_summary,
    generate_synthetic_cohort,
    load_cohort,
    write_cohort,
)
from src.config.run_config import SyntheticCohortSpec
from src.errors import StageFailedError
from src.model.checkpoint import save_checkpoint
from src.networks import (
    build_disease_graph,
    build_patient_graph,
    ddn_summary,
    patient_disease_bipartite,
    to_adjacency,
    write_coo,
    write_dot,
    write_graphml,
)
from src.observability import RunEventLog
from src.storage import RunDirectory
from src.training import (
    PreparedRun,
    RunReport,
    TrainResult,
    prepare_run,
    run_experiment,
    target_exclusion,
)

if TYPE_CHECKING:
    from src.config.run_config import RunConfig

logger = logging.getLogger(__name__)

Stage = Literal["ingest", "networks", "ddn", "features", "train", "evaluate", "analyze"]
STAGES: tuple[Stage, ...] = (
    "ingest",
    "networks",
    "ddn",
    "features",
    "train",
    "evaluate",
    "analyze",
)


def _package_version(name: str) -> str | None:
    try:
        return version(name)
    except PackageNotFoundError:
        return None


class Pipeline:
    """One configured run writing into a :class:`RunDirectory`."""

    def __init__(self, config: RunConfig, run_dir: RunDirectory, log_events: bool = True) -> None:
        self.config = config
        self.run_dir = run_dir
        run_id = f"{config.target.value.lower()}-{config.seed}"
        self.events = RunEventLog(run_dir.logs_dir, run_id=run_id, enabled=log_events)
        self.completed: list[Stage] = []
        self.cohort: Cohort | None = None
        self.prepared: PreparedRun | None = None
        self.report: RunReport | None = None
        self.first_model: TrainResult | None = None

    @contextmanager
    def _stage(self, name: Stage) -> Iterator[None]:
        try:
            with self.events.stage(name):
                yield
        except Exception as e:
            logger.error("Stage %s failed: %s", name, e)
            self.run_dir.mark_failed(name, e)
            self.write_manifest(status="failed", failed_stage=name)
            raise StageFailedError(name, e) from e
        self.completed.append(name)

    def run(self, stages: Sequence[Stage] = STAGES) -> RunDirectory:
        self.run_dir.ensure()
        self.run_dir.config_path.write_text(self.config.model_dump_json(indent=2) + "\n")
        steps = {
            "ingest": self.ingest,
            "networks": self.networks,
            "ddn": self.ddn,
            "features": self.features,
            "train": self.train,
            "evaluate": self.evaluate,
            "analyze": self.analyze,
        }
        for stage in stages:
            with self._stage(stage):
                steps[stage]()
        self.write_manifest(status="ok")
        return self.run_dir

    def ingest(self) -> None:
        source = self.config.cohort_source
        if isinstance(source, SyntheticCohortSpec):
            self.cohort = generate_synthetic_cohort(source, self.config.seed)
        else:
            self.cohort = load_cohort(
                source, self.config.target, self.config.code_ranges, self.config.input_format
            )
        write_cohort(self.cohort, self.run_dir.cohort_dir / "cohort.jsonl")
        summary = cohort_summary(self.cohort, self.config.analysis.top_k)
        self.run_dir.write_json("cohort/summary.json", summary.model_dump(mode="json"))

    def _cohort(self) -> Cohort:
        if self.cohort is None:
            raise RuntimeError("ingest has not run")
        return self.cohort

    def networks(self) -> None:
        cohort = self._cohort()
        out = self.run_dir.networks_dir
        excluded = target_exclusion(cohort, self.config)
        patient_graph = build_patient_graph(cohort, self.config.network.theta, excluded)
        write_graphml(patient_graph.to_networkx(), out / "patient_graph.graphml")
        write_coo(to_adjacency(patient_graph), out / "adjacency.coo")
        write_coo(patient_disease_bipartite(cohort, excluded), out / "bipartite.coo")
        for label in (Label.CASE, Label.CONTROL):
            graph = build_disease_graph(
                cohort.group(label), self.config.network.beta, self.config.network.min_coco
            )
            write_graphml(graph.to_networkx(), out / f"disease_{label}.graphml")

    def ddn(self) -> None:
        """Split, DDN and structural fit for the base seed; later runs redo this per seed."""
        self.prepared = prepare_run(self._cohort(), self.config, self.config.seed)
        ddn = self.prepared.ddn
        out = self.run_dir.networks_dir
        write_graphml(ddn.to_networkx(), out / "ddn.graphml")
        write_dot(ddn.to_networkx(), out / "ddn.dot", name="ddn")
        self.run_dir.write_json("networks/ddn.json", ddn_summary(ddn, self.config.analysis.top_k))
        plan = self.prepared.plan
        self.run_dir.write_json(
            "networks/split.json",
            {
                "seed": plan.seed,
                "ratios": list(plan.ratios),
                "train": [self.prepared.cohort.patients[i].id for i in plan.train_idx],
                "val": [self.prepared.cohort.patients[i].id for i in plan.val_idx],
                "test": [self.prepared.cohort.patients[i].id for i in plan.test_idx],
                "ddn_prior": list(self.prepared.prior_ids),
            },
        )

    def _prepared(self) -> PreparedRun:
        if self.prepared is None:
            raise RuntimeError("ddn has not run")
        return self.prepared

    def features(self) -> None:
        self._prepared().features.to_csv(self.run_dir.features_path)

    def _save_run(self, prepared: PreparedRun, result: TrainResult, ablated: TrainResult) -> None:
        hyper = self.config.hyper
        seed = prepared.seed
        extra = {"best_epoch": result.best_epoch, "columns": list(prepared.features.columns)}
        save_checkpoint(self.run_dir.checkpoint_path(seed), result.model, hyper, seed, extra)
        save_checkpoint(
            self.run_dir.checkpoint_path(seed, ablation=True),
            ablated.model,
            hyper,
            seed,
            {"best_epoch": ablated.best_epoch},
        )
        result.write_loss_curve(self.run_dir.curve_path(seed))
        ablated.write_loss_curve(self.run_dir.curve_path(seed, ablation=True))
        if seed == self.config.seed:
            self.first_model = result

    def train(self) -> None:
        prepared = self._prepared()
        self.report = run_experiment(
            self._cohort(),
            self.config,
            event_log=self.events,
            on_run=self._save_run,
            prepared_runs={prepared.seed: prepared},
        )

    def evaluate(self) -> None:
        if self.report is None:
            raise RuntimeError("train has not run")
        self.run_dir.report_path.write_text(self.report.to_json())
        ok = [e for e in self.report.entries if e.status == "ok"]
        if not ok:
            raise RuntimeError(f"All {self.report.runs} training runs failed")
        logger.info(
            "CGRL acc %s f1 %s | ablation acc %s f1 %s (%d failed)",
            self.report.cgrl["acc"].format(),
            self.report.cgrl["f1"].format(),
            self.report.ablation["acc"].format(),
            self.report.ablation["f1"].format(),
            len(self.report.failed),
        )

    def analyze(self) -> None:
        cohort = self._cohort()
        cases, controls = cohort.group(Label.CASE), cohort.group(Label.CONTROL)
        settings = self.config.analysis
        out = self.run_dir.analysis_dir

        compare_prevalence(cases, controls).to_csv(out / "prevalence.csv")
        network = self.config.network
        rows = compare_pair_ratios(cases, controls, top_k=settings.top_k, beta=network.beta)
        write_pair_ratios(rows, out / "pair_ratios.csv")

        case_graph = build_disease_graph(cases, network.beta, network.min_coco)
        min_weight = settings.cluster_min_weight
        if min_weight is None:
            min_weight = weight_percentile(case_graph, 75.0)
        clusters = high_risk_clusters(case_graph, min_weight)
        self.run_dir.write_json(
            "analysis/clusters.json",
            {
                "min_weight": min_weight,
                "clusters": [
                    {"diseases": sorted(c.diseases), "weight": c.weight} for c in clusters
                ],
            },
        )

        ranges = self.config.code_ranges
        targets = [c for c in cohort.disease_universe if ranges.is_target(c, cohort.target)]
        pathways = progression_pathways(cases, targets, settings.pathway_threshold)
        write_dot(pathways.graph, out / "pathways.dot", name="pathways")
        self.run_dir.write_json("analysis/pathways.json", pathways.to_json())
        pathways.to_csv(out / "pathways.csv")

        if self.first_model is not None and self.prepared is not None:
            model = self.first_model.model
            inputs = self.prepared.inputs
            model.trace_enabled = True
            with torch.no_grad():
                model(inputs.x, inputs.mask, inputs.c)
            if model.last_trace is not None:
                self.run_dir.write_json(
                    f"analysis/attention-{self.prepared.seed}.json",
                    model.last_trace.to_json(settings.top_k),
                )
            model.trace_enabled = False

    def write_manifest(self, status: str, failed_stage: str | None = None) -> None:
        runs = self.config.runs
        manifest = {
            "status": status,
            "failed_stage": failed_stage,
            "stages": list(self.completed),
            "target": self.config.target.value,
            "base_seed": self.config.seed,
            "seeds": [self.config.seed + i for i in range(runs)],
            "runs": runs,
            "train_runs": [
                {"run": e.run, "seed": e.seed, "status": e.status}
                for e in (self.report.entries if self.report else [])
            ],
            "config": self.config.model_dump(mode="json"),
            "versions": {
                "comorbinet": _package_version("comorbinet"),
                "numpy": np.__version__,
                "torch": torch.__version__,
            },
            "artifacts": self.run_dir.checksums(),
        }
        self.run_dir.write_json("manifest.json", manifest)


def run_pipeline(
    config: RunConfig,
    out: Path,
    stages: Sequence[Stage] = STAGES,
    log_events: bool = True,
) -> RunDirectory:
    """Execute ``stages`` in order and return the populated run directory."""
    return Pipeline(config, RunDirectory(out), log_events).run(stages)
