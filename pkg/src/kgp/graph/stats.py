from __future__ import annotations

from dataclasses import asdict, dataclass, field

from kgp.graph.model import SIMILARITY_KINDS, EdgeKind, KnowledgeGraph, NodeKind


@dataclass(frozen=True)
class GraphStats:
    """Size and density of a graph's similarity layer.

    ``num_edges`` counts distinct undirected passage pairs joined by at
    least one similarity edge; ``density`` and ``avg_degree`` are taken over
    passage nodes. Containment edges are reported separately.
    """

    num_nodes: int
    num_edges: int
    density: float
    avg_degree: float
    num_passages: int = 0
    num_containment_edges: int = 0
    edges_by_kind: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def graph_stats(graph: KnowledgeGraph) -> GraphStats:
    n_passages = len(graph.passage_ids())
    pairs = set()
    by_kind: dict[str, int] = {}
    containment = 0
    for u, v, kind, _ in graph.edges():
        if kind is EdgeKind.CONTAINMENT:
            containment += 1
            continue
        by_kind[kind.value] = by_kind.get(kind.value, 0) + 1
        pairs.add((u, v))
    n_edges = len(pairs)
    density = 2 * n_edges / (n_passages * (n_passages - 1)) if n_passages > 1 else 0.0
    avg_degree = 2 * n_edges / n_passages if n_passages else 0.0
    return GraphStats(
        num_nodes=len(graph.nodes),
        num_edges=n_edges,
        density=density,
        avg_degree=avg_degree,
        num_passages=n_passages,
        num_containment_edges=containment,
        edges_by_kind=by_kind,
    )


def degrees(graph: KnowledgeGraph, kinds=SIMILARITY_KINDS) -> dict[str, int]:
    return {nid: len(graph.neighbors(nid, kinds)) for nid in graph.passage_ids()}


def node_kinds(graph: KnowledgeGraph) -> set[NodeKind]:
    return {n.kind for n in graph.nodes.values()}
