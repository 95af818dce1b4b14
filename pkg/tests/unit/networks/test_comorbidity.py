from __future__ import annotations

import math
import random
from collections.abc import Callable
from itertools import combinations

import pytest

from src.cohort.models import Cohort, Label, PatientRecord
from src.errors import DegenerateDdnError, EmptyPopulationError, UndefinedCorrelationError
from src.networks.comorbidity import (
    DEFAULT_BETA,
    DifferentialNetwork,
    build_ddn,
    build_disease_graph,
    coco,
    prevalence,
)

PatientFactory = Callable[..., PatientRecord]


def _random_group(make_patient: PatientFactory, seed: int, n: int = 30) -> list[PatientRecord]:
    rng = random.Random(seed)
    pool = ["E11", "E78", "I10", "I25", "J44", "K76", "M17", "N18"]
    return [
        make_patient(f"g{i}", [rng.sample(pool, rng.randint(1, 3)), rng.sample(pool, 2)], "case")
        for i in range(n)
    ]


class TestPrevalence:
    def test_share_of_carriers(self, small_cohort: Cohort) -> None:
        cases = small_cohort.group(Label.CASE)
        assert prevalence(cases, "E78") == pytest.approx(5 / 6)
        assert prevalence(cases, "E11") == 1.0
        assert prevalence(cases, "J44") == 0.0

    def test_empty_population(self) -> None:
        with pytest.raises(EmptyPopulationError):
            prevalence([], "E11")


class TestCoco:
    def test_perfect_co_occurrence_scores_one(self) -> None:
        assert coco(co=10, pr_i=0.5, pr_j=0.5, n=20) == pytest.approx(1.0)

    def test_no_co_occurrence_scores_zero(self) -> None:
        assert coco(co=0, pr_i=0.3, pr_j=0.2, n=10) == 0.0

    def test_beta_scales_linearly(self) -> None:
        base = coco(co=3, pr_i=0.4, pr_j=0.6, n=10, beta=1.0)
        assert coco(co=3, pr_i=0.4, pr_j=0.6, n=10, beta=2.5) == pytest.approx(2.5 * base)

    def test_zero_prevalences_undefined(self) -> None:
        with pytest.raises(UndefinedCorrelationError):
            coco(co=0, pr_i=0.0, pr_j=0.0, n=5)

    def test_count_out_of_range(self) -> None:
        with pytest.raises(ValueError):
            coco(co=6, pr_i=0.5, pr_j=0.5, n=5)


class TestBuildDiseaseGraph:
    @pytest.mark.parametrize("seed", range(50))
    def test_edges_match_pairwise_oracle(self, make_patient: PatientFactory, seed: int) -> None:
        group = _random_group(make_patient, seed)
        graph = build_disease_graph(group)
        codes = sorted(set().union(*(p.diseases for p in group)))
        assert list(graph.nodes) == codes
        for a, b in combinations(codes, 2):
            co = sum(a in p.diseases and b in p.diseases for p in group)
            if co == 0:
                assert (a, b) not in graph.edges
                continue
            expected = coco(co, prevalence(group, a), prevalence(group, b), len(group))
            assert graph.edge_weight(a, b) == pytest.approx(expected, rel=1e-12)
            assert graph.edge_weight(b, a) == graph.edge_weight(a, b)

    def test_perfectly_paired_codes_weigh_one(self, make_patient: PatientFactory) -> None:
        group = [
            make_patient("a", [["I10", "E11"], ["E78"]]),
            make_patient("b", [["I10"], ["E11", "E78"]]),
            make_patient("c", [["I10"], ["J44"]]),
        ]
        graph = build_disease_graph(group, beta=DEFAULT_BETA)
        assert graph.edge_weight("E11", "E78") == pytest.approx(1.0, abs=1e-12)
        assert graph.nodes["E11"] == pytest.approx(2 / 3)
        assert graph.source_count == 3

    def test_min_coco_filters_edges(self, make_patient: PatientFactory) -> None:
        group = _random_group(make_patient, seed=1)
        full = build_disease_graph(group)
        cut = sorted(full.edges.values())[len(full.edges) // 2]
        pruned = build_disease_graph(group, min_coco=cut)
        assert set(pruned.edges) <= set(full.edges)
        assert all(w >= cut for w in pruned.edges.values())

    def test_empty_group(self) -> None:
        with pytest.raises(EmptyPopulationError):
            build_disease_graph([])

    def test_excluded_codes_dropped(self, small_cohort: Cohort) -> None:
        cases = small_cohort.group(Label.CASE)
        full = build_disease_graph(cases)
        without = build_disease_graph(cases, exclude=frozenset({"E11"}))
        assert "E11" not in without.nodes
        assert without.nodes == {c: pr for c, pr in full.nodes.items() if c != "E11"}
        assert without.edges == {pair: w for pair, w in full.edges.items() if "E11" not in pair}

    def test_networkx_export(self, small_cohort: Cohort) -> None:
        nx_graph = build_disease_graph(small_cohort.group(Label.CASE)).to_networkx()
        assert nx_graph.nodes["E78"]["prevalence"] == pytest.approx(5 / 6)
        assert nx_graph.has_edge("E11", "K76")


class TestBuildDdn:
    def test_keeps_only_case_excess(self, small_cohort: Cohort) -> None:
        ddn = build_ddn(small_cohort.group(Label.CASE), small_cohort.group(Label.CONTROL))
        assert ddn.nodes == pytest.approx({"E11": 1.0, "E78": 4 / 6, "K76": 5 / 6})
        assert ddn.node_weight("I10") == 0.0
        assert ddn.node_weight("J44") == 0.0
        assert all(w > 0 for w in ddn.edges.values())
        assert ddn.edge_weight("E11", "J44") == 0.0

    def test_edge_is_rectified_difference(self, small_cohort: Cohort) -> None:
        cases = small_cohort.group(Label.CASE)
        controls = small_cohort.group(Label.CONTROL)
        case_graph = build_disease_graph(cases)
        control_graph = build_disease_graph(controls)
        ddn = build_ddn(cases, controls)
        expected = case_graph.edge_weight("E78", "I10") - control_graph.edge_weight("E78", "I10")
        assert expected > 0
        assert ddn.edge_weight("I10", "E78") == pytest.approx(expected)

    def test_pagerank_over_node_set(self, small_cohort: Cohort) -> None:
        ddn = build_ddn(small_cohort.group(Label.CASE), small_cohort.group(Label.CONTROL))
        assert set(ddn.pagerank) == ddn.node_set
        assert "I10" in ddn.node_set
        assert math.fsum(ddn.pagerank.values()) == pytest.approx(1.0)

    def test_min_coco_applies_to_excess(self, make_patient: PatientFactory) -> None:
        cases = [make_patient(f"c{i}", [["A01"], ["B02"]]) for i in range(2)]
        controls = [
            make_patient("n1", [["A01"], ["B02"]]),
            make_patient("n2", [["A01"], ["C03"]]),
            make_patient("n3", [["B02"], ["C03"]]),
            make_patient("n4", [["C03"], ["D04"]]),
        ]
        assert build_disease_graph(cases).edge_weight("A01", "B02") == pytest.approx(1.0)
        assert build_disease_graph(controls).edge_weight("A01", "B02") == pytest.approx(0.5)

        kept = build_ddn(cases, controls, min_coco=0.4)
        assert kept.edge_weight("A01", "B02") == pytest.approx(0.5)
        dropped = build_ddn(cases, controls, min_coco=0.6)
        assert dropped.edge_weight("A01", "B02") == 0.0
        assert dropped.node_weight("A01") == pytest.approx(0.5)

    def test_excluded_codes_never_enter(self, small_cohort: Cohort) -> None:
        ddn = build_ddn(
            small_cohort.group(Label.CASE),
            small_cohort.group(Label.CONTROL),
            exclude=frozenset({"E11"}),
        )
        assert "E11" not in ddn.node_set
        assert "E11" not in ddn.pagerank
        assert ddn.nodes == pytest.approx({"E78": 4 / 6, "K76": 5 / 6})

    def test_identical_groups_are_degenerate(self, small_cohort: Cohort) -> None:
        cases = small_cohort.group(Label.CASE)
        with pytest.raises(DegenerateDdnError):
            build_ddn(cases, cases)

    def test_empty_group(self, small_cohort: Cohort) -> None:
        with pytest.raises(EmptyPopulationError):
            build_ddn(small_cohort.group(Label.CASE), [])

    def test_top_lists_sorted(self) -> None:
        ddn = DifferentialNetwork(
            nodes={"A01": 0.2, "B02": 0.5, "C03": 0.5},
            edges={("A01", "B02"): 0.1, ("B02", "C03"): 0.3},
        )
        assert [code for code, _ in ddn.top_nodes(2)] == ["B02", "C03"]
        assert ddn.top_edges(1) == [(("B02", "C03"), 0.3)]
        assert ddn.rank("A01") == 0.0
