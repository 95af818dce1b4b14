from src.training.experiment import (
    MetricSummary,
    PreparedRun,
    RunEntry,
    RunReport,
    prepare_run,
    run_experiment,
    target_exclusion,
)
from src.training.metrics import classification_metrics, cross_entropy_loss
from src.training.split import SplitPlan, stratified_partition, stratified_split
from src.training.trainer import (
    EpochRecord,
    GraphInputs,
    TrainResult,
    evaluate,
    predictions,
    train,
)

__all__ = [
    "EpochRecord",
    "GraphInputs",
    "MetricSummary",
    "PreparedRun",
    "RunEntry",
    "RunReport",
    "SplitPlan",
    "TrainResult",
    "classification_metrics",
    "cross_entropy_loss",
    "evaluate",
    "predictions",
    "prepare_run",
    "run_experiment",
    "stratified_partition",
    "stratified_split",
    "target_exclusion",
    "train",
]
