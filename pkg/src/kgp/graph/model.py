from __future__ import annotations

import copy
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Iterator


class NodeKind(str, Enum):
    PASSAGE = "passage"
    PAGE = "page"
    TABLE = "table"


class EdgeKind(str, Enum):
    LEXICAL = "lexical"
    SEMANTIC = "semantic"
    ENTITY = "entity"
    CONTAINMENT = "containment"

    @property
    def symmetric(self) -> bool:
        return self is not EdgeKind.CONTAINMENT


SIMILARITY_KINDS = frozenset({EdgeKind.LEXICAL, EdgeKind.SEMANTIC, EdgeKind.ENTITY})


@dataclass(frozen=True)
class Node:
    node_id: str
    kind: NodeKind
    feature: str
    doc_id: str
    page_number: int | None = None
    table_id: int | None = None


class KnowledgeGraph:
    """Typed nodes plus typed adjacency.

    ``_adj[u][v]`` maps edge kind to weight. Similarity kinds are stored in
    both directions; containment is stored page -> child only. Treat
    instances as immutable once built: mutation helpers are for builders,
    and :meth:`copy` is used for copy-on-write updates.
    """

    def __init__(self, meta: dict[str, Any] | None = None):
        self.nodes: dict[str, Node] = {}
        self._adj: dict[str, dict[str, dict[EdgeKind, float | None]]] = {}
        self.meta: dict[str, Any] = meta or {}
        self._cache: dict[str, Any] = {}

    # -- construction helpers

    def add_node(self, node: Node) -> None:
        if node.node_id in self.nodes:
            raise ValueError(f"duplicate node id {node.node_id!r}")
        self.nodes[node.node_id] = node
        self._adj[node.node_id] = {}
        self._cache.clear()

    def add_edge(self, u: str, v: str, kind: EdgeKind, weight: float | None = None) -> None:
        if u == v:
            raise ValueError(f"self-loop on {u!r}")
        if u not in self.nodes or v not in self.nodes:
            raise KeyError(f"edge endpoint missing: {u!r} -> {v!r}")
        self._adj[u].setdefault(v, {})[kind] = weight
        if kind.symmetric:
            self._adj[v].setdefault(u, {})[kind] = weight
        self._cache.clear()

    def remove_nodes(self, node_ids: Iterable[str]) -> None:
        doomed = set(node_ids)
        for nid in doomed:
            del self.nodes[nid]
            del self._adj[nid]
        for nbrs in self._adj.values():
            for nid in doomed & nbrs.keys():
                del nbrs[nid]
        self._cache.clear()

    def copy(self) -> "KnowledgeGraph":
        g = KnowledgeGraph(copy.deepcopy(self.meta))
        g.nodes = dict(self.nodes)
        g._adj = {u: {v: dict(k) for v, k in nbrs.items()} for u, nbrs in self._adj.items()}
        return g

    # -- queries

    def has_edge(self, u: str, v: str, kind: EdgeKind | None = None) -> bool:
        kinds = self._adj.get(u, {}).get(v)
        if not kinds:
            return False
        return kind is None or kind in kinds

    def weight(self, u: str, v: str, kind: EdgeKind) -> float | None:
        return self._adj[u][v][kind]

    def neighbors(self, node_id: str, kinds: Iterable[EdgeKind] | None = None) -> list[str]:
        """Outgoing neighbors over the given edge kinds (default: similarity), ascending id."""
        wanted = SIMILARITY_KINDS if kinds is None else frozenset(kinds)
        return sorted(v for v, ks in self._adj[node_id].items() if wanted & ks.keys())

    def passage_neighbors(self, node_id: str) -> list[str]:
        key = "pn:" + node_id
        if key not in self._cache:
            self._cache[key] = [
                v for v in self.neighbors(node_id) if self.nodes[v].kind is NodeKind.PASSAGE
            ]
        return self._cache[key]

    def edges(self, kinds: Iterable[EdgeKind] | None = None) -> Iterator[tuple[str, str, EdgeKind, float | None]]:
        """Each symmetric edge once (src < dst); containment edges as stored."""
        wanted = frozenset(EdgeKind) if kinds is None else frozenset(kinds)
        for u in sorted(self._adj):
            for v in sorted(self._adj[u]):
                for kind in sorted(self._adj[u][v], key=lambda k: k.value):
                    if kind not in wanted:
                        continue
                    if kind.symmetric and not u < v:
                        continue
                    yield u, v, kind, self._adj[u][v][kind]

    def edge_set(self, kinds: Iterable[EdgeKind] | None = None) -> set[tuple[str, str, EdgeKind]]:
        return {(u, v, k) for u, v, k, _ in self.edges(kinds)}

    def nodes_of_kind(self, kind: NodeKind) -> list[Node]:
        return [self.nodes[i] for i in sorted(self.nodes) if self.nodes[i].kind is kind]

    def passage_ids(self) -> list[str]:
        key = "passage_ids"
        if key not in self._cache:
            self._cache[key] = [n.node_id for n in self.nodes_of_kind(NodeKind.PASSAGE)]
        return self._cache[key]

    def doc_ids(self) -> list[str]:
        return list(dict.fromkeys(n.doc_id for n in self.nodes.values()))

    def cached(self, key: str, factory):
        """Memoize a derived structure; invalidated by any mutation."""
        if key not in self._cache:
            self._cache[key] = factory()
        return self._cache[key]

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return self.nodes == other.nodes and list(self.edges()) == list(other.edges())

    def __repr__(self) -> str:
        return f"KnowledgeGraph(nodes={len(self.nodes)}, edges={sum(1 for _ in self.edges())})"
