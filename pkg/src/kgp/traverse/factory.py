from __future__ import annotations

from typing import Mapping, Sequence

from kgp.embed import EmbeddingProvider, HashingProvider, provider_from_meta
from kgp.graph.model import KnowledgeGraph
from kgp.traverse.agents import (
    Agent,
    EncoderMatcher,
    OracleAgent,
    RemoteLLMAgent,
    TextMatcher,
    TfIdfAgent,
)
from kgp.traverse.remote import CompletionClient
from kgp.traverse.retrieve import passage_index

AGENTS = ("oracle", "tfidf", "remote")


def graph_provider(graph: KnowledgeGraph) -> EmbeddingProvider:
    """The provider the graph was built with, else a default hashing embedder."""
    if "embed" in graph.meta:
        return provider_from_meta(graph.meta["embed"])
    return HashingProvider()


def make_matcher(
    graph: KnowledgeGraph,
    match_mode: str = "text",
    provider: EmbeddingProvider | None = None,
    text_similarity: str = "tfidf",
) -> TextMatcher | EncoderMatcher:
    if match_mode == "encoder":
        return EncoderMatcher(provider or graph_provider(graph))
    return TextMatcher(passage_index(graph), text_similarity)


def make_agent(
    name: str,
    graph: KnowledgeGraph,
    match_mode: str = "text",
    *,
    answer_key: Mapping[str, Sequence[str]] | None = None,
    provider: EmbeddingProvider | None = None,
    client: CompletionClient | None = None,
    text_similarity: str = "tfidf",
) -> Agent:
    matcher = make_matcher(graph, match_mode, provider, text_similarity)
    if name == "tfidf":
        return TfIdfAgent(matcher)
    if name == "oracle":
        return OracleAgent(answer_key or {}, matcher)
    if name == "remote":
        return RemoteLLMAgent(client or CompletionClient(), matcher)
    raise ValueError(f"unknown agent {name!r}; expected one of {AGENTS}")


def answer_key_from_ids(graph: KnowledgeGraph, sf_ids: Mapping[str, Sequence[str]]) -> dict[str, list[str]]:
    """Map question -> supporting-fact texts, looked up from passage ids."""
    return {q: [graph.nodes[i].feature for i in ids if i in graph.nodes] for q, ids in sf_ids.items()}
