from __future__ import annotations

import json
from pathlib import Path

import networkx as nx
import scipy.sparse as sp

from src.networks.comorbidity import DifferentialNetwork
from src.networks.export import ddn_summary, to_dot, write_coo, write_dot, write_graphml, write_json


def _ddn() -> DifferentialNetwork:
    return DifferentialNetwork(
        nodes={"E11": 0.8, "E78": 0.3},
        edges={("E11", "E78"): 0.4, ("E78", "K76"): 0.1},
        pagerank={"E11": 0.4, "E78": 0.45, "K76": 0.15},
    )


class TestToDot:
    def test_undirected_graph(self) -> None:
        graph = nx.Graph()
        graph.add_edge("B", "A", weight=0.12345)
        text = to_dot(graph, name="demo")
        assert text.startswith("graph demo {")
        assert '"A" -- "B"' in text or '"B" -- "A"' in text
        assert 'label="0.123"' not in text
        assert "label=0.123" in text
        assert text.endswith("}\n")

    def test_directed_highlight(self) -> None:
        graph = nx.DiGraph()
        graph.add_edge("E78", "E11", weight=0.5, highlighted=True)
        graph.add_edge("J44", "E11", weight=0.1, highlighted=False)
        text = to_dot(graph)
        lines = text.splitlines()
        assert lines[0] == "digraph G {"
        hot = next(line for line in lines if line.strip().startswith('"E78" ->'))
        cold = next(line for line in lines if line.strip().startswith('"J44" ->'))
        assert 'color="orange"' in hot
        assert "color" not in cold

    def test_quotes_escaped(self) -> None:
        graph = nx.Graph()
        graph.add_node('a"b')
        assert '"a\\"b"' in to_dot(graph)


class TestWriters:
    def test_graphml_readable(self, tmp_path: Path) -> None:
        path = write_graphml(_ddn().to_networkx(), tmp_path / "nested" / "ddn.graphml")
        loaded = nx.read_graphml(path)
        assert set(loaded.nodes) == {"E11", "E78", "K76"}
        assert loaded.edges["E11", "E78"]["weight"] == 0.4

    def test_dot_file(self, tmp_path: Path) -> None:
        path = write_dot(_ddn().to_networkx(), tmp_path / "ddn.dot", name="ddn")
        assert path.read_text().startswith("graph ddn {")

    def test_coo_lines_sorted(self, tmp_path: Path) -> None:
        matrix = sp.csr_array(([1, 2, 3], ([1, 0, 0], [0, 2, 1])), shape=(2, 3))
        path = write_coo(matrix, tmp_path / "m.coo")
        assert path.read_text().splitlines() == ["0 1 3", "0 2 2", "1 0 1"]

    def test_json_sorted_with_newline(self, tmp_path: Path) -> None:
        path = write_json({"b": 1, "a": [1, 2]}, tmp_path / "x.json")
        text = path.read_text()
        assert text.endswith("}\n")
        assert text.index('"a"') < text.index('"b"')


class TestDdnSummary:
    def test_counts_and_rankings(self) -> None:
        summary = ddn_summary(_ddn(), k=1)
        assert summary["nodes"] == 3
        assert summary["edges"] == 2
        assert summary["top_nodes"] == [{"code": "E11", "weight": 0.8, "pagerank": 0.4}]
        assert summary["top_edges"] == [{"pair": ["E11", "E78"], "weight": 0.4}]
        assert summary["top_pagerank"] == [{"code": "E78", "pagerank": 0.45}]
        json.dumps(summary)
