from src.features.matrix import FeatureMatrix, feature_matrix, network_features
from src.features.pagerank import pagerank
from src.features.scores import (
    FeatureTriple,
    PatientNetworkPN,
    edge_score,
    feature_triple,
    node_score,
    rank_score,
)

__all__ = [
    "FeatureMatrix",
    "FeatureTriple",
    "PatientNetworkPN",
    "edge_score",
    "feature_matrix",
    "feature_triple",
    "network_features",
    "node_score",
    "pagerank",
    "rank_score",
]
