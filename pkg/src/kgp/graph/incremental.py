"""Add or remove one document without rebuilding the graph.

Only edges touching the new document's nodes are computed; edges among
existing nodes are left untouched, so ``remove_document(add_document(g, d),
d.doc_id) == g``. An incrementally grown graph can therefore differ from a
from-scratch rebuild (idf and KNN rankings among old nodes are not
revisited).
"""

from __future__ import annotations

from collections import Counter, defaultdict
from typing import Mapping

from kgp.corpus import Document, split_passages
from kgp.embed import EmbeddingProvider, embed, provider_from_meta
from kgp.errors import IdError
from kgp.graph.build import (
    GazetteerExtractor,
    _overlap_edges,
    add_document_structure,
    knn_lists,
    passage_entities,
    passage_keywords,
    passage_node,
    rank_document_keywords,
    title_keywords,
)
from kgp.graph.model import EdgeKind, KnowledgeGraph, NodeKind
from kgp.text import default_stopwords, terms


def _stopwords(meta: Mapping) -> frozenset[str]:
    custom = meta.get("stopwords")
    return frozenset(custom) if custom else default_stopwords()


def _add_lexical(g: KnowledgeGraph, doc: Document, new_ids: set[str]) -> None:
    stop = _stopwords(g.meta)
    doc_counts: dict[str, Counter[str]] = defaultdict(Counter)
    for node in g.nodes_of_kind(NodeKind.PASSAGE):
        doc_counts[node.doc_id].update(t for t in terms(node.feature) if t not in stop)
    m = int(g.meta.get("keywords_m", 20))
    top_m = rank_document_keywords(doc_counts, m)
    contributed = list(dict.fromkeys(top_m[doc.doc_id] + title_keywords(doc.title, stop)))
    keywords = g.meta.setdefault("keywords", {})
    keywords[doc.doc_id] = contributed
    space = set().union(*map(set, keywords.values()))
    sets = {n.node_id: passage_keywords(n.feature, space) for n in g.nodes_of_kind(NodeKind.PASSAGE)}
    _overlap_edges(g, sets, EdgeKind.LEXICAL, restrict_to=new_ids)


def _add_semantic(
    g: KnowledgeGraph, new_ids: set[str], provider: EmbeddingProvider | None
) -> None:
    provider = provider or provider_from_meta(g.meta.get("embed", {}))
    k = int(g.meta.get("knn_k", 5))
    mutual = bool(g.meta.get("mutual", False))
    nodes = g.nodes_of_kind(NodeKind.PASSAGE)
    vecs = embed(provider, [n.feature for n in nodes])
    embeddings = {n.node_id: v for n, v in zip(nodes, vecs)}
    lists = knn_lists(list(embeddings), embeddings, k)
    chosen = {(u, v): w for u, nbrs in lists.items() for v, w in nbrs}
    for (u, v), w in sorted(chosen.items()):
        if u not in new_ids and v not in new_ids:
            continue
        if mutual and (v, u) not in chosen:
            continue
        if not g.has_edge(u, v, EdgeKind.SEMANTIC):
            g.add_edge(u, v, EdgeKind.SEMANTIC, w)


def _add_entity(g: KnowledgeGraph, new_ids: set[str]) -> None:
    extractor = GazetteerExtractor(g.meta.get("gazetteer", []))
    from kgp.corpus import Passage

    passages = [
        Passage(n.node_id, n.doc_id, n.page_number, n.feature, len(n.feature.split()))
        for n in g.nodes_of_kind(NodeKind.PASSAGE)
    ]
    _overlap_edges(g, passage_entities(passages, extractor), EdgeKind.ENTITY, restrict_to=new_ids)


def add_document(
    graph: KnowledgeGraph,
    doc: Document,
    method_params: Mapping | None = None,
    *,
    provider: EmbeddingProvider | None = None,
) -> KnowledgeGraph:
    """Return a new graph with ``doc`` inserted under the graph's construction settings.

    ``method_params`` may override keys of ``graph.meta`` (e.g. ``knn_k``).
    """
    if doc.doc_id in set(graph.doc_ids()) or doc.doc_id in graph.meta.get("titles", {}):
        raise IdError(doc.doc_id)
    g = graph.copy()
    if method_params:
        g.meta.update(method_params)
    budget = int(g.meta.get("passage_len", 250))
    passages = split_passages(doc, budget)
    for p in passages:
        g.add_node(passage_node(p))
    g.meta.setdefault("titles", {})[doc.doc_id] = doc.title
    new_ids = {p.passage_id for p in passages}
    methods = g.meta.get("methods", [])
    if "tfidf" in methods:
        _add_lexical(g, doc, new_ids)
    if "knn" in methods:
        _add_semantic(g, new_ids, provider)
    if "entity" in methods:
        _add_entity(g, new_ids)
    if g.meta.get("with_structure"):
        add_document_structure(g, doc, passages)
    return g


def remove_document(graph: KnowledgeGraph, doc_id: str) -> KnowledgeGraph:
    doomed = [nid for nid, n in graph.nodes.items() if n.doc_id == doc_id]
    if not doomed and doc_id not in graph.meta.get("titles", {}):
        raise IdError(doc_id)
    g = graph.copy()
    g.remove_nodes(doomed)
    g.meta.get("titles", {}).pop(doc_id, None)
    g.meta.get("keywords", {}).pop(doc_id, None)
    return g
