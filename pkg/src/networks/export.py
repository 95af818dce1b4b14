from __future__ import annotations

import json
from pathlib import Path
from typing import TYPE_CHECKING, Any

import networkx as nx

if TYPE_CHECKING:
    import scipy.sparse as sp

    from src.networks.comorbidity import DifferentialNetwork


def _prepare(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_graphml(graph: nx.Graph, path: Path) -> Path:
    nx.write_graphml(graph, _prepare(path))
    return path


def _quote(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    text = str(value).replace('"', '\\"')
    return f'"{text}"'


def to_dot(graph: nx.Graph, name: str = "G") -> str:
    """DOT text for ``graph``; edges flagged ``highlighted`` are drawn orange."""
    directed = graph.is_directed()
    arrow = "->" if directed else "--"
    lines = [f"{'digraph' if directed else 'graph'} {name} {{"]
    for node, attrs in sorted(graph.nodes(data=True), key=lambda item: str(item[0])):
        parts = [f"label={_quote(node)}"] + [f"{k}={_quote(v)}" for k, v in sorted(attrs.items())]
        lines.append(f"  {_quote(node)} [{', '.join(parts)}];")
    for a, b, attrs in sorted(graph.edges(data=True), key=lambda e: (str(e[0]), str(e[1]))):
        parts = [f"{k}={_quote(v)}" for k, v in sorted(attrs.items()) if k != "highlighted"]
        if "weight" in attrs:
            parts.append(f"label={_quote(round(float(attrs['weight']), 3))}")
        if attrs.get("highlighted"):
            parts += ['color="orange"', "penwidth=2"]
        lines.append(f"  {_quote(a)} {arrow} {_quote(b)} [{', '.join(parts)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(graph: nx.Graph, path: Path, name: str = "G") -> Path:
    _prepare(path).write_text(to_dot(graph, name), encoding="utf-8")
    return path


def write_coo(matrix: sp.sparray, path: Path) -> Path:
    """Coordinate-list text, one ``row col value`` line per stored entry."""
    coo = matrix.tocoo()
    order = sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist(), strict=True))
    text = "".join(f"{r} {c} {v:g}\n" for r, c, v in order)
    _prepare(path).write_text(text, encoding="utf-8")
    return path


def ddn_summary(ddn: DifferentialNetwork, k: int = 10) -> dict[str, Any]:
    return {
        "nodes": len(ddn.node_set),
        "edges": len(ddn.edges),
        "top_nodes": [
            {"code": code, "weight": w, "pagerank": ddn.rank(code)} for code, w in ddn.top_nodes(k)
        ],
        "top_edges": [{"pair": list(pair), "weight": w} for pair, w in ddn.top_edges(k)],
        "top_pagerank": [
            {"code": code, "pagerank": score}
            for code, score in sorted(ddn.pagerank.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
        ],
    }


def write_json(data: Any, path: Path) -> Path:
    _prepare(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
