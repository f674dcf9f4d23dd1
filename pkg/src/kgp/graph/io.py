"""JSON persistence for knowledge graphs.

Layout::

    {"meta": {...},
     "nodes": [{"id", "kind", "feature", "doc_id", "page", "table_id"?}],
     "edges": [{"src", "dst", "kind", "weight"}]}

Similarity edges are listed once with ``src < dst``; containment edges are
listed page -> child. Output is canonical (sorted keys and records), so
saving a loaded graph reproduces the original bytes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from kgp.errors import DeserializationError
from kgp.graph.model import EdgeKind, KnowledgeGraph, Node, NodeKind


def graph_to_dict(graph: KnowledgeGraph) -> dict[str, Any]:
    nodes = []
    for nid in sorted(graph.nodes):
        n = graph.nodes[nid]
        rec: dict[str, Any] = {
            "id": n.node_id,
            "kind": n.kind.value,
            "feature": n.feature,
            "doc_id": n.doc_id,
            "page": n.page_number,
        }
        if n.table_id is not None:
            rec["table_id"] = n.table_id
        nodes.append(rec)
    edges = [
        {"src": u, "dst": v, "kind": k.value, "weight": w} for u, v, k, w in graph.edges()
    ]
    return {"meta": graph.meta, "nodes": nodes, "edges": edges}


def dumps(graph: KnowledgeGraph) -> str:
    return json.dumps(graph_to_dict(graph), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def graph_from_dict(obj: Any) -> KnowledgeGraph:
    try:
        g = KnowledgeGraph(dict(obj["meta"]))
        for rec in obj["nodes"]:
            g.add_node(
                Node(
                    node_id=rec["id"],
                    kind=NodeKind(rec["kind"]),
                    feature=rec["feature"],
                    doc_id=rec["doc_id"],
                    page_number=rec.get("page"),
                    table_id=rec.get("table_id"),
                )
            )
        for rec in obj["edges"]:
            w = rec.get("weight")
            g.add_edge(rec["src"], rec["dst"], EdgeKind(rec["kind"]), None if w is None else float(w))
    except (KeyError, TypeError, ValueError) as exc:
        raise DeserializationError(f"malformed graph: {exc!r}") from exc
    return g


def loads(data: str | bytes) -> KnowledgeGraph:
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DeserializationError(f"corrupt graph file: {exc}") from exc
    return graph_from_dict(obj)


def save_graph(graph: KnowledgeGraph, path: str | Path) -> None:
    Path(path).write_text(dumps(graph), encoding="utf-8")


def load_graph(path: str | Path) -> KnowledgeGraph:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise DeserializationError(f"cannot read {path}: {exc}") from exc
    return loads(data)
