"""Seed search, neighbor ranking and budgeted breadth-wise traversal."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Literal, Sequence

from kgp.errors import (
    EmptyGraphError,
    ExhaustedCandidatesError,
    StructureNotFoundError,
)
from kgp.graph.model import EdgeKind, KnowledgeGraph, NodeKind
from kgp.text import Ranking, TermIndex, top_n_by_score
from kgp.traverse.agents import Agent
from kgp.traverse.question import Question, QuestionClassifier, classify_question


@dataclass(frozen=True)
class TraversalConfig:
    budget_K: int = 30
    branching_factor: int = 3
    seed_count: int = 10
    max_hops: int = 2
    match_mode: Literal["encoder", "text"] = "text"

    def __post_init__(self) -> None:
        for name in ("budget_K", "branching_factor", "seed_count", "max_hops"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.seed_count > self.budget_K:
            raise ValueError("seed_count must not exceed budget_K")
        if self.match_mode not in ("encoder", "text"):
            raise ValueError(f"unknown match_mode {self.match_mode!r}")


@dataclass
class ReasoningPath:
    node_ids: list[str]
    generated_evidence: list[str] = field(default_factory=list)

    def extend(self, node_id: str, evidence: str) -> "ReasoningPath":
        return ReasoningPath(self.node_ids + [node_id], self.generated_evidence + [evidence])

    @property
    def hops(self) -> int:
        return len(self.node_ids) - 1


@dataclass
class RetrievalResult:
    paths: list[ReasoningPath] = field(default_factory=list)
    context_passages: list[str] = field(default_factory=list)
    structural_payloads: list[str] = field(default_factory=list)
    context_texts: list[str] = field(default_factory=list)
    seed_fallback: bool = False
    # queues ran dry before the budget was used up
    shortfall: bool = False

    @classmethod
    def from_texts(cls, texts: Sequence[str]) -> "RetrievalResult":
        """A result carrying fixed context, e.g. gold supporting facts."""
        return cls(context_texts=list(texts))

    def to_dict(self) -> dict:
        return {
            "paths": [{"node_ids": p.node_ids, "generated_evidence": p.generated_evidence} for p in self.paths],
            "context_passages": self.context_passages,
            "context_texts": self.context_texts,
            "structural_payloads": self.structural_payloads,
            "seed_fallback": self.seed_fallback,
            "shortfall": self.shortfall,
        }


def passage_index(graph: KnowledgeGraph) -> TermIndex:
    return graph.cached(
        "term_index",
        lambda: TermIndex({n.node_id: n.feature for n in graph.nodes_of_kind(NodeKind.PASSAGE)}),
    )


def _text(question: Question | str) -> str:
    return question.text if isinstance(question, Question) else question


def seed_search(graph: KnowledgeGraph, question: Question | str, seed_count: int) -> Ranking:
    """Top passages by summed tf-idf of the (distinct, non-stopword) question terms.

    idf is computed over passage nodes. An all-zero scoring yields the
    lexicographically first passages with ``fallback`` set.
    """
    index = passage_index(graph)
    return top_n_by_score(index.tfidf_scores(_text(question)), seed_count)


def _rank(
    graph: KnowledgeGraph,
    question: str,
    path: ReasoningPath,
    candidates: Sequence[str] | set[str],
    agent: Agent,
    top_b: int,
) -> tuple[list[tuple[str, float]], object]:
    if top_b < 1:
        raise ValueError("top_b must be >= 1")
    on_path = set(path.node_ids)
    pool = sorted(c for c in candidates if c not in on_path)
    if not pool:
        raise ExhaustedCandidatesError("every candidate is already on the path")
    visited_texts = [graph.nodes[n].feature for n in path.node_ids]
    evidence = agent.generate_evidence(question, visited_texts)
    scored = [
        (c, float(agent.score(agent.map_candidate(graph.nodes[c].feature), evidence))) for c in pool
    ]
    scored.sort(key=lambda p: (-p[1], p[0]))
    return scored[:top_b], evidence


def rank_neighbors(
    graph: KnowledgeGraph,
    question: Question | str,
    path: ReasoningPath,
    candidates: Sequence[str] | set[str],
    agent: Agent,
    top_b: int,
) -> list[tuple[str, float]]:
    """Score unvisited candidates against the agent's evidence; best ``top_b`` first.

    Raises :class:`ExhaustedCandidatesError` when every candidate already
    lies on ``path``.
    """
    ranked, _ = _rank(graph, _text(question), path, candidates, agent, top_b)
    return ranked


def retrieve(
    graph: KnowledgeGraph,
    question: Question | str,
    agent: Agent,
    config: TraversalConfig | None = None,
) -> RetrievalResult:
    """Budgeted traversal from TF-IDF seeds guided by ``agent``.

    Paths are processed first-in first-out. Each dequeued path ranks the
    neighbors of its last node, and the best ``branching_factor`` extend it.
    The budget counts distinct retrieved passages: seeds first, then every
    newly reached passage; retrieval stops once the count reaches
    ``budget_K``. Paths exclude their own nodes but may reuse
    passages reached by other paths. Paths stop growing after ``max_hops``
    extensions.
    """
    config = config or TraversalConfig()
    if not graph.passage_ids():
        raise EmptyGraphError("graph has no passage nodes")
    qtext = _text(question)

    seeds = seed_search(graph, qtext, config.seed_count)
    result = RetrievalResult(seed_fallback=seeds.fallback)
    visited: dict[str, None] = dict.fromkeys(seeds)
    paths = deque(ReasoningPath([s]) for s in seeds)
    cands = deque(graph.passage_neighbors(s) for s in seeds)
    result.paths.extend(paths)
    k = len(visited)

    while paths and cands and k < config.budget_K:
        path, cand = paths.popleft(), cands.popleft()
        if path.hops >= config.max_hops or not cand:
            continue
        try:
            chosen, evidence = _rank(graph, qtext, path, cand, agent, config.branching_factor)
        except ExhaustedCandidatesError:
            continue
        for v, _score in chosen:
            if v not in visited:
                visited[v] = None
                k += 1
            new_path = path.extend(v, str(evidence))
            result.paths.append(new_path)
            paths.append(new_path)
            cands.append(graph.passage_neighbors(v))
            if k >= config.budget_K:
                break

    result.shortfall = k < config.budget_K
    result.context_passages = list(visited)
    result.context_texts = [graph.nodes[n].feature for n in result.context_passages]
    return result


# -- structural questions ------------------------------------------------------------


def _passage_order(node_id: str) -> tuple[str, int]:
    doc, _, ordinal = node_id.rpartition("#")
    return (doc, int(ordinal)) if ordinal.isdigit() else (node_id, -1)


def _scoped_docs(graph: KnowledgeGraph, text: str) -> set[str] | None:
    """Documents whose title the question mentions, or ``None`` for no scoping."""
    lowered = text.lower()
    hits = {
        doc_id
        for doc_id, title in graph.meta.get("titles", {}).items()
        if re.search(r"(?<!\w)" + re.escape(title.lower()) + r"(?!\w)", lowered)
    }
    return hits or None


def retrieve_structural(graph: KnowledgeGraph, question: Question) -> RetrievalResult:
    """Fetch table markdown or page passages for each structure reference.

    When the question names one or more document titles, lookups are
    restricted to those documents.
    """
    scope = _scoped_docs(graph, question.text)
    result = RetrievalResult()
    for kind, ordinal in question.structure_refs:
        if kind == "table":
            hits = [
                n for n in graph.nodes_of_kind(NodeKind.TABLE)
                if n.table_id == ordinal and (scope is None or n.doc_id in scope)
            ]
            if not hits:
                raise StructureNotFoundError(kind, ordinal)
            result.structural_payloads.extend(n.feature for n in hits)
        else:
            pages = [
                n for n in graph.nodes_of_kind(NodeKind.PAGE)
                if n.page_number == ordinal and (scope is None or n.doc_id in scope)
            ]
            if not pages:
                raise StructureNotFoundError(kind, ordinal)
            for page in pages:
                children = [
                    c for c in graph.neighbors(page.node_id, [EdgeKind.CONTAINMENT])
                    if graph.nodes[c].kind is NodeKind.PASSAGE
                ]
                for c in sorted(children, key=_passage_order):
                    result.structural_payloads.append(graph.nodes[c].feature)
    return result


def answer_context(
    graph: KnowledgeGraph,
    text: str,
    agent: Agent,
    config: TraversalConfig | None = None,
    classifier: QuestionClassifier | None = None,
) -> tuple[Question, RetrievalResult]:
    """Classify ``text`` and dispatch to structural lookup or traversal."""
    question = classify_question(text, classifier)
    if question.kind == "structural":
        return question, retrieve_structural(graph, question)
    return question, retrieve(graph, question, agent, config)
