from src.analysis.clusters import RiskCluster, high_risk_clusters, weight_percentile
from src.analysis.pathways import PathwayGraph, progression_pathways
from src.analysis.prevalence import (
    PairRatioRow,
    PrevalenceComparison,
    PrevalenceRow,
    compare_pair_ratios,
    compare_prevalence,
    pair_ratio,
    write_pair_ratios,
)

__all__ = [
    "PairRatioRow",
    "PathwayGraph",
    "PrevalenceComparison",
    "PrevalenceRow",
    "RiskCluster",
    "compare_pair_ratios",
    "compare_prevalence",
    "high_risk_clusters",
    "pair_ratio",
    "progression_pathways",
    "weight_percentile",
    "write_pair_ratios",
]
