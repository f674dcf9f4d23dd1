import math
import random

import numpy as np
import pytest

from kgp.corpus import Block, Corpus, Document, Page, Passage
from kgp.embed import HashingProvider
from kgp.errors import (
    DeserializationError,
    DimensionError,
    EmptyCorpusError,
    ExtractionError,
    IdError,
    InconsistentInputError,
    MissingEmbeddingError,
    StructureError,
)
from kgp.eval.synthetic import SyntheticSpec, generate_synthetic_corpus
from kgp.graph import io as graph_io
from kgp.graph.build import (
    BuildParams,
    GazetteerExtractor,
    add_document_structure,
    add_structural_nodes,
    build_entity_graph,
    build_graph,
    build_knn_graph,
    build_tfidf_graph,
    extract_keywords,
    knn_lists,
    parse_table,
    passage_embeddings,
    table_markdown,
)
from kgp.graph.incremental import add_document, remove_document
from kgp.graph.model import EdgeKind, KnowledgeGraph, Node, NodeKind
from kgp.graph.stats import graph_stats, node_kinds
from oracles import entity_edges, knn_neighbor_lists, tfidf_edges, words


def _doc(doc_id, *texts, title=None):
    return Document(doc_id, title or doc_id, (Page(1, tuple(Block("text", t) for t in texts)),))


def _corpus(*docs):
    return Corpus(tuple(docs)).split()


def _passage_corpus(vectors):
    """One single-passage document per vector id; returns corpus and embeddings."""
    corpus = _corpus(*[_doc(i, f"text {i}") for i in vectors])
    return corpus, {f"{i}#0": np.asarray(v, dtype=float) for i, v in vectors.items()}


# -- keywords --------------------------------------------------------------------


def test_term_in_every_document_is_excluded():
    corpus = _corpus(_doc("a", "shared apple"), _doc("b", "shared banana"), _doc("c", "shared cherry"))
    index = extract_keywords(corpus, m=5)
    assert "shared" not in index.keyword_space
    assert {"apple", "banana", "cherry"} <= index.keyword_space


def test_title_terms_always_in_keyword_space():
    corpus = _corpus(
        _doc("d1", "The composer wrote music for television for years.", title="Alf Clausen"),
        _doc("d2", "Another passage entirely about gardens and soil."),
    )
    index = extract_keywords(corpus, m=1)
    assert {"alf", "clausen"} <= index.keyword_space


def test_top_m_matches_bruteforce_ranking():
    corpus = _corpus(
        _doc("a", "river river bank fish fish fish stone"),
        _doc("b", "river bank money money loan"),
        _doc("c", "stone stone wall wall wall castle"),
    )
    index = extract_keywords(corpus, m=2)
    counts = {}
    for p in corpus.passages:
        counts.setdefault(p.doc_id, []).extend(words(p.text))
    for d, toks in counts.items():
        scored = []
        for t in set(toks):
            df = sum(1 for other in counts.values() if t in other)
            w = toks.count(t) * math.log(3 / df)
            if w > 0:
                scored.append((-w, t))
        assert index.per_document_top_m[d] == [t for _, t in sorted(scored)[:2]]


def test_empty_corpus():
    with pytest.raises(EmptyCorpusError):
        extract_keywords(Corpus(()))


# -- lexical graph ---------------------------------------------------------------


def test_shared_keyword_makes_edge():
    corpus = _corpus(
        _doc("p1", "Alf Clausen scored the episode.", title="Alf Clausen"),
        _doc("p2", "The show hired Clausen in 1990."),
        _doc("p3", "Unrelated gardening advice about tomatoes."),
    )
    g = build_tfidf_graph(corpus, extract_keywords(corpus))
    assert g.has_edge("p1#0", "p2#0", EdgeKind.LEXICAL)
    assert not g.has_edge("p1#0", "p3#0")


def test_disjoint_keywords_no_edge():
    corpus = _corpus(_doc("a", "apples oranges"), _doc("b", "engines pistons"))
    g = build_tfidf_graph(corpus, extract_keywords(corpus))
    assert list(g.edges()) == []


def test_tfidf_graph_matches_pairwise_oracle():
    rng = random.Random(5)
    vocab = [f"v{i}" for i in range(15)]
    docs = [_doc(f"d{i}", *[" ".join(rng.choices(vocab, k=6)) for _ in range(4)]) for i in range(5)]
    corpus = _corpus(*docs)
    assert len(corpus.passages) == 20
    g = build_tfidf_graph(corpus, extract_keywords(corpus, m=4))
    assert {(u, v): w for u, v, _, w in g.edges()} == tfidf_edges(corpus, 4)


def test_index_corpus_mismatch():
    a = _corpus(_doc("a", "x y"), _doc("b", "y z"))
    b = _corpus(_doc("c", "x y"), _doc("d", "y z"))
    with pytest.raises(InconsistentInputError):
        build_tfidf_graph(b, extract_keywords(a))


# -- knn graph -------------------------------------------------------------------


def test_knn_k0_has_no_edges():
    corpus, emb = _passage_corpus({"a": (1, 0), "b": (0, 1)})
    g = build_knn_graph(corpus, emb, 0)
    assert len(g.passage_ids()) == 2 and list(g.edges()) == []


def test_knn_hand_vectors():
    corpus, emb = _passage_corpus({"n1": (1, 0), "n2": (0.9, 0.1), "n3": (0, 1)})
    assert knn_lists(list(emb), emb, 1)["n1#0"][0][0] == "n2#0"
    g = build_knn_graph(corpus, emb, 1)
    assert g.has_edge("n1#0", "n2#0", EdgeKind.SEMANTIC)


def test_knn_matches_full_similarity_oracle():
    rng = np.random.default_rng(3)
    vecs = {f"x{i:02d}": rng.normal(size=8) for i in range(50)}
    corpus, emb = _passage_corpus(vecs)
    g = build_knn_graph(corpus, emb, 5)
    lists = knn_neighbor_lists({k: list(v) for k, v in emb.items()}, 5)
    expected = {tuple(sorted((u, v))) for u, vs in lists.items() for v in vs}
    assert {(u, v) for u, v, _, _ in g.edges()} == expected


def test_knn_ties_break_by_id():
    corpus, emb = _passage_corpus({"a": (1, 0), "b": (1, 0), "c": (1, 0), "d": (0, 1)})
    assert [v for v, _ in knn_lists(list(emb), emb, 2)["c#0"]] == ["a#0", "b#0"]


def test_mutual_knn_is_subset_of_union():
    rng = np.random.default_rng(8)
    corpus, emb = _passage_corpus({f"m{i}": rng.normal(size=4) for i in range(20)})
    union = build_knn_graph(corpus, emb, 3).edge_set()
    mutual = build_knn_graph(corpus, emb, 3, mutual=True).edge_set()
    assert mutual <= union
    g = build_knn_graph(corpus, emb, 3, mutual=True)
    assert all(len(g.neighbors(p)) <= 3 for p in g.passage_ids())


def test_knn_embedding_errors():
    corpus, emb = _passage_corpus({"a": (1, 0), "b": (0, 1)})
    bad = dict(emb)
    del bad["b#0"]
    with pytest.raises(MissingEmbeddingError):
        build_knn_graph(corpus, bad, 1)
    bad = dict(emb, **{"b#0": np.ones(3)})
    with pytest.raises(DimensionError):
        build_knn_graph(corpus, bad, 1)


# -- entity graph ----------------------------------------------------------------


def test_shared_entity_edge_and_empty_gazetteer():
    corpus = _corpus(_doc("a", "Alf Clausen wrote it."), _doc("b", "They hired alf  clausen."), _doc("c", "No one."))
    g = build_entity_graph(corpus, GazetteerExtractor(["Alf Clausen"]))
    assert {(u, v) for u, v, _, _ in g.edges()} == {("a#0", "b#0")}
    assert list(build_entity_graph(corpus, GazetteerExtractor([])).edges()) == []


def test_longest_match_wins():
    ex = GazetteerExtractor(["new york", "new york city", "york"])
    assert ex.extract("I moved to New York City last year; York is old.") == {"new york city", "york"}


def test_entity_graph_matches_oracle():
    rng = random.Random(12)
    vocab = [f"e{i}" for i in range(12)] + ["the", "and", "of"]
    names = [f"e{i}" for i in range(8)] + ["e8 e9", "e10 e11"]
    docs = [_doc(f"d{i}", *[" ".join(rng.choices(vocab, k=7)) for _ in range(4)]) for i in range(5)]
    corpus = _corpus(*docs)
    g = build_entity_graph(corpus, GazetteerExtractor(names))
    assert {(u, v): w for u, v, _, w in g.edges()} == entity_edges(corpus, names)


def test_extractor_failure_names_passage():
    class Broken:
        def extract(self, text):
            raise RuntimeError("boom")

    with pytest.raises(ExtractionError) as exc:
        build_entity_graph(_corpus(_doc("a", "x")), Broken())
    assert exc.value.passage_id == "a#0"


# -- structure -------------------------------------------------------------------


def test_page_containment_and_table_markdown():
    doc = Document(
        "r",
        "Report",
        (
            Page(
                1,
                (
                    Block("text", "one."),
                    Block("text", "two."),
                    Block("text", "three."),
                    Block("table", "Grade,Count\nFellow,12", table_id=1),
                ),
            ),
        ),
    )
    corpus = Corpus((doc,)).split()
    g = build_graph(corpus, BuildParams(with_structure=True))
    assert len(g.neighbors("r#page1", [EdgeKind.CONTAINMENT])) == 4
    assert g.nodes["r#table1"].feature == "| Grade | Count |\n|---|---|\n| Fellow | 12 |"


def test_markdown_escapes_pipes():
    assert table_markdown(parse_table('a,b\n"x|y",z')) == "| a | b |\n|---|---|\n| x\\|y | z |"


def test_no_tables_means_only_passage_and_page_nodes(small_corpus):
    plain = Corpus(tuple(d for d in small_corpus.documents if d.doc_id != "alpha")).split()
    g = build_graph(plain, BuildParams(with_structure=True))
    assert node_kinds(g) == {NodeKind.PASSAGE, NodeKind.PAGE}


def test_containment_edges_are_directed(small_corpus):
    g = add_structural_nodes(build_graph(small_corpus), small_corpus)
    assert g.has_edge("alpha#page1", "alpha#0", EdgeKind.CONTAINMENT)
    assert "alpha#page1" not in g.passage_neighbors("alpha#0")


def test_passage_on_missing_page():
    doc = _doc("a", "x.")
    stray = Passage("a#9", "a", 4, "x.", 1)
    g = KnowledgeGraph()
    g.add_node(Node("a#9", NodeKind.PASSAGE, "x.", "a", 4))
    with pytest.raises(StructureError):
        add_document_structure(g, doc, [stray])


# -- merged builds ---------------------------------------------------------------


def test_merged_graph_unions_kinds():
    corpus, _ = generate_synthetic_corpus(SyntheticSpec(num_docs=6, seed=4))
    merged = build_graph(corpus, BuildParams(method="merged", knn_k=2, gazetteer=["filler"]))
    tfidf = build_graph(corpus, BuildParams(method="tfidf"))
    knn = build_graph(corpus, BuildParams(method="knn", knn_k=2))
    assert merged.edge_set([EdgeKind.LEXICAL]) == tfidf.edge_set()
    assert merged.edge_set([EdgeKind.SEMANTIC]) == knn.edge_set()
    assert merged.meta["methods"] == ["tfidf", "knn", "entity"]


def test_weights_are_keyword_overlap_counts():
    corpus = _corpus(_doc("a", "alpha beta gamma"), _doc("b", "alpha beta delta"), _doc("c", "omega"))
    g = build_tfidf_graph(corpus, extract_keywords(corpus, m=5))
    assert g.weight("a#0", "b#0", EdgeKind.LEXICAL) == 2.0


# -- incremental -----------------------------------------------------------------


def test_add_then_remove_is_identity(small_corpus):
    g = build_graph(small_corpus, BuildParams(method="merged", knn_k=2, with_structure=True))
    fresh = _doc("delta", "A new storm hit the harbor and the river.", title="Delta Report")
    grown = add_document(g, fresh)
    assert grown != g
    assert remove_document(grown, "delta") == g


def test_add_sharing_keyword_adds_lexical_edge():
    corpus = _corpus(_doc("a", "Ohio farms grow corn.", title="Ohio"), _doc("b", "Texas ranches raise cattle."))
    g = build_graph(corpus)
    grown = add_document(g, _doc("c", "Ohio rivers flood in spring."))
    new_edges = grown.edge_set() - g.edge_set()
    assert ("a#0", "c#0", EdgeKind.LEXICAL) in new_edges


def test_add_matches_bruteforce_edges_touching_new_doc():
    corpus, _ = generate_synthetic_corpus(SyntheticSpec(num_docs=6, seed=9))
    g = build_graph(corpus, BuildParams(keywords_m=10))
    extra, _ = generate_synthetic_corpus(SyntheticSpec(num_docs=3, seed=10))
    fresh = Document("zzz", extra.documents[0].title, extra.documents[0].pages)
    grown = add_document(g, fresh)
    # a merged corpus rebuild has the same edges wherever the new doc is involved
    rebuilt = build_graph(Corpus(corpus.documents + (fresh,)).split(), BuildParams(keywords_m=10))
    touching = {e for e in rebuilt.edge_set() if e[0].startswith("zzz#") or e[1].startswith("zzz#")}
    assert {e for e in grown.edge_set() if "zzz#" in e[0] + e[1]} == touching


def test_incremental_id_errors(small_corpus):
    g = build_graph(small_corpus)
    with pytest.raises(IdError) as exc:
        remove_document(g, "zz")
    assert str(exc.value) == "zz"
    with pytest.raises(IdError):
        add_document(g, small_corpus.documents[0])


def test_add_does_not_mutate_input(small_corpus):
    g = build_graph(small_corpus)
    before = graph_io.dumps(g)
    add_document(g, _doc("new", "storm harbor"))
    assert graph_io.dumps(g) == before


# -- stats -----------------------------------------------------------------------


def test_empty_graph_stats():
    s = graph_stats(KnowledgeGraph())
    assert (s.num_nodes, s.num_edges, s.density) == (0, 0, 0)


def test_complete_graph_density():
    g = KnowledgeGraph()
    ids = list("abcd")
    for i in ids:
        g.add_node(Node(i, NodeKind.PASSAGE, i, i, 1))
    for i, u in enumerate(ids):
        for v in ids[i + 1 :]:
            g.add_edge(u, v, EdgeKind.LEXICAL, 1.0)
            g.add_edge(u, v, EdgeKind.SEMANTIC, 0.5)
    s = graph_stats(g)
    assert s.density == 1.0
    assert s.num_edges == 6
    assert s.avg_degree == 3.0
    assert s.edges_by_kind == {"lexical": 6, "semantic": 6}


# -- model -----------------------------------------------------------------------


def test_model_rejects_self_loops_and_unknown_nodes():
    g = KnowledgeGraph()
    g.add_node(Node("a", NodeKind.PASSAGE, "a", "a", 1))
    with pytest.raises(ValueError):
        g.add_edge("a", "a", EdgeKind.LEXICAL)
    with pytest.raises(KeyError):
        g.add_edge("a", "b", EdgeKind.LEXICAL)
    with pytest.raises(ValueError):
        g.add_node(Node("a", NodeKind.PASSAGE, "a", "a", 1))


# -- serialization ---------------------------------------------------------------


def test_save_load_round_trip(tmp_path, small_corpus):
    g = build_graph(small_corpus, BuildParams(method="merged", knn_k=2, with_structure=True, gazetteer=["storm"]))
    path = tmp_path / "g.json"
    graph_io.save_graph(g, path)
    again = graph_io.load_graph(path)
    assert again == g
    assert again.meta == g.meta


def test_truncated_file(tmp_path, small_corpus):
    path = tmp_path / "g.json"
    graph_io.save_graph(build_graph(small_corpus), path)
    path.write_text(path.read_text()[:-20])
    with pytest.raises(DeserializationError):
        graph_io.load_graph(path)


@pytest.mark.parametrize("bad", ['{"nodes": 3}', '{"nodes": [], "edges": [{"src": "x"}]}', "[]"])
def test_malformed_graph_json(bad):
    with pytest.raises(DeserializationError):
        graph_io.loads(bad)


def test_large_graph_byte_identical_reserialization():
    g = KnowledgeGraph({"method": "knn"})
    for i in range(10_000):
        g.add_node(Node(f"n{i}", NodeKind.PASSAGE, f"text {i}", f"d{i // 10}", 1))
    rng = random.Random(0)
    for _ in range(20_000):
        u, v = rng.sample(range(10_000), 2)
        if not g.has_edge(f"n{u}", f"n{v}"):
            g.add_edge(f"n{u}", f"n{v}", EdgeKind.SEMANTIC, rng.random())
    first = graph_io.dumps(g)
    assert graph_io.dumps(graph_io.loads(first)) == first


def test_hashing_embeddings_are_reused_by_knn_build(small_corpus):
    emb = passage_embeddings(HashingProvider(256), small_corpus.passages)
    direct = build_knn_graph(small_corpus, emb, 2)
    via_params = build_graph(small_corpus, BuildParams(method="knn", knn_k=2))
    assert direct.edge_set() == via_params.edge_set()
