from __future__ import annotations

import pytest

from src.analysis.clusters import RiskCluster, high_risk_clusters, weight_percentile
from src.cohort.models import Label
from src.cohort.synthetic import generate_synthetic_cohort
from src.config.run_config import SyntheticCohortSpec, Target
from src.networks.comorbidity import DifferentialNetwork, build_disease_graph


def _network() -> DifferentialNetwork:
    return DifferentialNetwork(
        nodes={"A01": 0.3, "G02": 0.1},
        edges={
            ("A01", "B02"): 0.9,
            ("B02", "C03"): 0.8,
            ("D04", "E05"): 0.5,
            ("E05", "F06"): 0.1,
        },
    )


class TestWeightPercentile:
    def test_interpolated(self) -> None:
        assert weight_percentile(_network()) == pytest.approx(0.825)
        assert weight_percentile(_network(), q=50) == pytest.approx(0.65)

    def test_no_edges(self) -> None:
        assert weight_percentile(DifferentialNetwork(nodes={"A01": 1.0}, edges={})) == 0.0


class TestHighRiskClusters:
    def test_components_over_heavy_edges(self) -> None:
        clusters = high_risk_clusters(_network(), min_weight=0.4)
        assert clusters == [
            RiskCluster(diseases=frozenset({"A01", "B02", "C03"}), weight=pytest.approx(1.7)),
            RiskCluster(diseases=frozenset({"D04", "E05"}), weight=0.5),
        ]
        assert len(clusters[0]) == 3

    def test_high_threshold_splits(self) -> None:
        clusters = high_risk_clusters(_network(), min_weight=0.85)
        assert [c.diseases for c in clusters] == [frozenset({"A01", "B02"})]

    def test_nothing_survives(self) -> None:
        assert high_risk_clusters(_network(), min_weight=5.0) == []

    def test_equal_weight_ties_sorted_by_codes(self) -> None:
        network = DifferentialNetwork(
            nodes={}, edges={("X01", "X02"): 0.5, ("B01", "B02"): 0.5}
        )
        clusters = high_risk_clusters(network, min_weight=0.0)
        assert [sorted(c.diseases) for c in clusters] == [["B01", "B02"], ["X01", "X02"]]

    def test_planted_cluster_recovered(self) -> None:
        spec = SyntheticCohortSpec(target=Target.DM, n_patients=400, p_case=0.9, p_base=0.05)
        cohort = generate_synthetic_cohort(spec, seed=1)
        graph = build_disease_graph(cohort.group(Label.CASE))
        clusters = high_risk_clusters(graph, weight_percentile(graph, 75))
        planted = set(spec.planted_codes)
        assert any(planted <= cluster.diseases for cluster in clusters)
