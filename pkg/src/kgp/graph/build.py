"""Graph construction: lexical (TF-IDF keywords), semantic (KNN), entity overlap,
and structural page/table nodes."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from kgp.corpus import Corpus, Document, Passage
from kgp.embed import EmbeddingProvider, embed, similarity_matrix
from kgp.errors import (
    DimensionError,
    EmptyCorpusError,
    ExtractionError,
    InconsistentInputError,
    MissingEmbeddingError,
    StructureError,
)
from kgp.graph.model import EdgeKind, KnowledgeGraph, Node, NodeKind
from kgp.text import content_terms, default_stopwords, terms

DEFAULT_KEYWORDS_PER_DOC = 20


# -- keywords --------------------------------------------------------------------


@dataclass
class KeywordIndex:
    keyword_space: set[str]
    per_passage_keywords: dict[str, frozenset[str]]
    per_document_top_m: dict[str, list[str]]
    # keywords contributed by each document (top-m plus title terms)
    per_document_keywords: dict[str, list[str]] = field(default_factory=dict)


def document_term_counts(passages: Iterable[Passage], stopwords: frozenset[str]) -> Counter[str]:
    counts: Counter[str] = Counter()
    for p in passages:
        counts.update(t for t in terms(p.text) if t not in stopwords)
    return counts


def rank_document_keywords(
    doc_counts: Mapping[str, Counter[str]], m: int
) -> dict[str, list[str]]:
    """Top-``m`` terms per document by ``tf * ln(N / df)``; ties by term.

    Terms present in every document have zero weight and are never kept.
    """
    n = len(doc_counts)
    df: Counter[str] = Counter()
    for counts in doc_counts.values():
        df.update(counts.keys())
    out: dict[str, list[str]] = {}
    for doc_id, counts in doc_counts.items():
        scored = [(tf * math.log(n / df[t]), t) for t, tf in counts.items() if df[t] < n]
        scored.sort(key=lambda p: (-p[0], p[1]))
        out[doc_id] = [t for _, t in scored[:m]]
    return out


def title_keywords(title: str, stopwords: frozenset[str]) -> list[str]:
    return list(dict.fromkeys(content_terms(title, stopwords)))


def passage_keywords(text: str, keyword_space: set[str] | frozenset[str]) -> frozenset[str]:
    return frozenset(t for t in terms(text) if t in keyword_space)


def extract_keywords(
    corpus: Corpus, m: int = DEFAULT_KEYWORDS_PER_DOC, stopwords: frozenset[str] | None = None
) -> KeywordIndex:
    if m < 1:
        raise ValueError("m must be >= 1")
    if not corpus.documents or not corpus.passages:
        raise EmptyCorpusError("corpus has no documents or passages")
    stop = default_stopwords() if stopwords is None else stopwords
    by_doc: dict[str, list[Passage]] = defaultdict(list)
    for p in corpus.passages:
        by_doc[p.doc_id].append(p)
    doc_counts = {d.doc_id: document_term_counts(by_doc[d.doc_id], stop) for d in corpus.documents}
    top_m = rank_document_keywords(doc_counts, m)
    contributed = {
        d.doc_id: list(dict.fromkeys(top_m[d.doc_id] + title_keywords(d.title, stop)))
        for d in corpus.documents
    }
    space = set().union(*contributed.values())
    per_passage = {p.passage_id: passage_keywords(p.text, space) for p in corpus.passages}
    return KeywordIndex(space, per_passage, top_m, contributed)


# -- node helpers ----------------------------------------------------------------


def passage_node(p: Passage) -> Node:
    return Node(p.passage_id, NodeKind.PASSAGE, p.text, p.doc_id, p.page_number)


def _passage_graph(corpus: Corpus, meta: dict) -> KnowledgeGraph:
    meta.setdefault("titles", {d.doc_id: d.title for d in corpus.documents})
    g = KnowledgeGraph(meta)
    for p in corpus.passages:
        g.add_node(passage_node(p))
    return g


def _overlap_edges(
    g: KnowledgeGraph,
    sets: Mapping[str, frozenset[str]],
    kind: EdgeKind,
    restrict_to: set[str] | None = None,
) -> None:
    """Connect node pairs whose sets intersect, weight = intersection size.

    An inverted index keeps this proportional to co-occurring pairs rather
    than all pairs. With ``restrict_to``, only pairs touching at least one
    node in it are considered.
    """
    postings: dict[str, list[str]] = defaultdict(list)
    for nid in sorted(sets):
        for item in sets[nid]:
            postings[item].append(nid)
    pairs: Counter[tuple[str, str]] = Counter()
    for ids in postings.values():
        for u, v in combinations(ids, 2):
            if restrict_to is None or u in restrict_to or v in restrict_to:
                pairs[(u, v)] += 1
    for (u, v), w in sorted(pairs.items()):
        g.add_edge(u, v, kind, float(w))


# -- lexical ---------------------------------------------------------------------


def add_lexical_edges(g: KnowledgeGraph, index: KeywordIndex) -> None:
    _overlap_edges(g, index.per_passage_keywords, EdgeKind.LEXICAL)


def build_tfidf_graph(corpus: Corpus, index: KeywordIndex) -> KnowledgeGraph:
    ids = {p.passage_id for p in corpus.passages}
    if ids != set(index.per_passage_keywords):
        raise InconsistentInputError("keyword index was built over a different corpus")
    g = _passage_graph(corpus, {"methods": ["tfidf"]})
    add_lexical_edges(g, index)
    g.meta["keywords"] = {d: list(kws) for d, kws in index.per_document_keywords.items()}
    return g


# -- semantic --------------------------------------------------------------------


def _check_embeddings(ids: Sequence[str], embeddings: Mapping[str, Sequence[float]]) -> None:
    dim = None
    for i in ids:
        if i not in embeddings:
            raise MissingEmbeddingError(i)
        d = len(embeddings[i])
        if dim is None:
            dim = d
        elif d != dim:
            raise DimensionError(f"embedding for {i!r} has dimension {d}, expected {dim}")


def knn_lists(
    ids: Sequence[str], embeddings: Mapping[str, Sequence[float]], k: int
) -> dict[str, list[tuple[str, float]]]:
    """Each id's ``k`` most cosine-similar other ids, ties by ascending id.

    ``k`` beyond ``n - 1`` is capped, so every id lists all the others.
    """
    ids = sorted(ids)
    _check_embeddings(ids, embeddings)
    if k <= 0 or len(ids) < 2:
        return {i: [] for i in ids}
    sims = similarity_matrix(ids, embeddings)
    np.fill_diagonal(sims, -np.inf)
    out: dict[str, list[tuple[str, float]]] = {}
    # ids are sorted, so a stable sort on -sim breaks ties by ascending id.
    order = np.argsort(-sims, axis=1, kind="stable")[:, : min(k, len(ids) - 1)]
    for r, i in enumerate(ids):
        out[i] = [(ids[c], float(sims[r, c])) for c in order[r]]
    return out


def add_semantic_edges(
    g: KnowledgeGraph, embeddings: Mapping[str, Sequence[float]], k: int, mutual: bool = False
) -> None:
    lists = knn_lists(g.passage_ids(), embeddings, k)
    chosen = {(u, v) for u, nbrs in lists.items() for v, _ in nbrs}
    weights = {(u, v): w for u, nbrs in lists.items() for v, w in nbrs}
    for u, v in sorted(chosen):
        if mutual and (v, u) not in chosen:
            continue
        if g.has_edge(u, v, EdgeKind.SEMANTIC):
            continue
        g.add_edge(u, v, EdgeKind.SEMANTIC, weights[(u, v)])


def build_knn_graph(
    corpus: Corpus,
    embeddings: Mapping[str, Sequence[float]],
    k: int,
    *,
    mutual: bool = False,
) -> KnowledgeGraph:
    if k < 0:
        raise ValueError("k must be >= 0")
    g = _passage_graph(corpus, {"methods": ["knn"], "knn_k": k, "mutual": mutual})
    add_semantic_edges(g, embeddings, k, mutual)
    return g


def passage_embeddings(provider: EmbeddingProvider, passages: Sequence[Passage]) -> dict[str, np.ndarray]:
    vecs = embed(provider, [p.text for p in passages])
    return {p.passage_id: v for p, v in zip(passages, vecs)}


# -- entities --------------------------------------------------------------------


class EntityExtractor(Protocol):
    def extract(self, text: str) -> set[str]: ...


class GazetteerExtractor:
    """Case-insensitive longest-match lookup of known entity names.

    Matching runs over the term sequence, so punctuation and case in either
    the gazetteer or the text do not matter. Matches do not overlap; at each
    position the longest entry wins.
    """

    def __init__(self, entities: Iterable[str]):
        self.entries: dict[tuple[str, ...], str] = {}
        for e in entities:
            key = tuple(terms(e))
            if key:
                self.entries[key] = " ".join(key)
        self.max_len = max((len(k) for k in self.entries), default=0)

    def extract(self, text: str) -> set[str]:
        toks = terms(text)
        found: set[str] = set()
        i = 0
        while i < len(toks):
            for n in range(min(self.max_len, len(toks) - i), 0, -1):
                hit = self.entries.get(tuple(toks[i : i + n]))
                if hit is not None:
                    found.add(hit)
                    i += n
                    break
            else:
                i += 1
        return found

    def names(self) -> list[str]:
        return sorted(self.entries.values())


def passage_entities(passages: Iterable[Passage], extractor: EntityExtractor) -> dict[str, frozenset[str]]:
    out: dict[str, frozenset[str]] = {}
    for p in passages:
        try:
            out[p.passage_id] = frozenset(extractor.extract(p.text))
        except Exception as exc:  # noqa: BLE001 - any extractor failure is reported per passage
            raise ExtractionError(p.passage_id, exc) from exc
    return out


def build_entity_graph(corpus: Corpus, extractor: EntityExtractor) -> KnowledgeGraph:
    meta: dict = {"methods": ["entity"]}
    if isinstance(extractor, GazetteerExtractor):
        meta["gazetteer"] = extractor.names()
    g = _passage_graph(corpus, meta)
    _overlap_edges(g, passage_entities(corpus.passages, extractor), EdgeKind.ENTITY)
    return g


# -- structure -------------------------------------------------------------------


def parse_table(content: str) -> list[list[str]]:
    """Rows of a CSV-encoded table block."""
    return [row for row in csv.reader(io.StringIO(content.strip())) if row]


def _escape_cell(cell: str) -> str:
    return cell.strip().replace("\\", "\\\\").replace("|", "\\|").replace("\n", " ")


def table_markdown(rows: Sequence[Sequence[str]]) -> str:
    """Pipe-delimited markdown table; the first row is the header."""
    if not rows:
        raise ValueError("table has no rows")
    width = max(len(r) for r in rows)
    padded = [list(r) + [""] * (width - len(r)) for r in rows]
    lines = ["| " + " | ".join(_escape_cell(c) for c in padded[0]) + " |"]
    lines.append("|" + "|".join(["---"] * width) + "|")
    for row in padded[1:]:
        lines.append("| " + " | ".join(_escape_cell(c) for c in row) + " |")
    return "\n".join(lines)


def page_node_id(doc_id: str, page_number: int) -> str:
    return f"{doc_id}#page{page_number}"


def table_node_id(doc_id: str, table_id: int) -> str:
    return f"{doc_id}#table{table_id}"


def add_document_structure(g: KnowledgeGraph, doc: Document, passages: Sequence[Passage]) -> None:
    pages = {p.page_number for p in doc.pages}
    for page in doc.pages:
        g.add_node(
            Node(page_node_id(doc.doc_id, page.page_number), NodeKind.PAGE,
                 str(page.page_number), doc.doc_id, page.page_number)
        )
    for p in passages:
        if p.page_number not in pages:
            raise StructureError(
                f"passage {p.passage_id!r} references page {p.page_number} absent from {doc.doc_id!r}"
            )
        g.add_edge(page_node_id(doc.doc_id, p.page_number), p.passage_id, EdgeKind.CONTAINMENT)
    for page_number, block in doc.tables():
        nid = table_node_id(doc.doc_id, block.table_id)
        g.add_node(
            Node(nid, NodeKind.TABLE, table_markdown(parse_table(block.content)),
                 doc.doc_id, page_number, block.table_id)
        )
        g.add_edge(page_node_id(doc.doc_id, page_number), nid, EdgeKind.CONTAINMENT)


def add_structural_nodes(graph: KnowledgeGraph, corpus: Corpus) -> KnowledgeGraph:
    """Return a copy of ``graph`` with page/table nodes and containment edges."""
    g = graph.copy()
    for doc in corpus.documents:
        passages = [p for p in corpus.passages_of(doc.doc_id) if p.passage_id in g.nodes]
        add_document_structure(g, doc, passages)
    g.meta["with_structure"] = True
    return g


# -- one-stop builder ------------------------------------------------------------


@dataclass
class BuildParams:
    method: str = "tfidf"  # tfidf | knn | entity | merged
    keywords_m: int = DEFAULT_KEYWORDS_PER_DOC
    knn_k: int = 5
    mutual: bool = False
    with_structure: bool = False
    embed_dimension: int = 256
    gazetteer: list[str] = field(default_factory=list)
    # non-empty only when a custom list replaces the built-in one
    stopwords: list[str] = field(default_factory=list)

    def methods(self) -> list[str]:
        if self.method == "merged":
            return ["tfidf", "knn"] + (["entity"] if self.gazetteer else [])
        if self.method not in ("tfidf", "knn", "entity"):
            raise ValueError(f"unknown construction method {self.method!r}")
        return [self.method]

    def stopword_set(self) -> frozenset[str]:
        return frozenset(self.stopwords) if self.stopwords else default_stopwords()


def build_graph(
    corpus: Corpus,
    params: BuildParams | None = None,
    provider: EmbeddingProvider | None = None,
) -> KnowledgeGraph:
    """Build a graph with one or more similarity edge kinds from a split corpus."""
    from kgp.embed import HashingProvider

    params = params or BuildParams()
    if not corpus.passages:
        corpus = corpus.split()
    methods = params.methods()
    meta: dict = {
        "method": params.method,
        "methods": methods,
        "passage_len": corpus.passage_length_budget,
        "with_structure": params.with_structure,
    }
    g = _passage_graph(corpus, meta)
    if "tfidf" in methods:
        index = extract_keywords(corpus, params.keywords_m, params.stopword_set())
        add_lexical_edges(g, index)
        meta["keywords_m"] = params.keywords_m
        meta["keywords"] = {d: list(k) for d, k in index.per_document_keywords.items()}
        if params.stopwords:
            meta["stopwords"] = sorted(params.stopwords)
    if "knn" in methods:
        provider = provider or HashingProvider(params.embed_dimension)
        add_semantic_edges(g, passage_embeddings(provider, corpus.passages), params.knn_k, params.mutual)
        meta["knn_k"] = params.knn_k
        meta["mutual"] = params.mutual
        meta["embed"] = provider.describe() if hasattr(provider, "describe") else {"provider": provider.name}
    if "entity" in methods:
        extractor = GazetteerExtractor(params.gazetteer)
        _overlap_edges(g, passage_entities(corpus.passages, extractor), EdgeKind.ENTITY)
        meta["gazetteer"] = extractor.names()
    if params.with_structure:
        for doc in corpus.documents:
            add_document_structure(g, doc, corpus.passages_of(doc.doc_id))
    return g
