from kgp.graph.build import (
    BuildParams,
    GazetteerExtractor,
    KeywordIndex,
    add_structural_nodes,
    build_entity_graph,
    build_graph,
    build_knn_graph,
    build_tfidf_graph,
    extract_keywords,
    table_markdown,
)
from kgp.graph.incremental import add_document, remove_document
from kgp.graph.io import load_graph, save_graph
from kgp.graph.model import EdgeKind, KnowledgeGraph, Node, NodeKind
from kgp.graph.stats import GraphStats, graph_stats

__all__ = [
    "BuildParams",
    "EdgeKind",
    "GazetteerExtractor",
    "GraphStats",
    "KeywordIndex",
    "KnowledgeGraph",
    "Node",
    "NodeKind",
    "add_document",
    "add_structural_nodes",
    "build_entity_graph",
    "build_graph",
    "build_knn_graph",
    "build_tfidf_graph",
    "extract_keywords",
    "graph_stats",
    "load_graph",
    "remove_document",
    "save_graph",
    "table_markdown",
]
