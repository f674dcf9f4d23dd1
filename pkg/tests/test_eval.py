import csv
import math
import random

import pytest

from kgp.embed import HashingProvider
from kgp.errors import InputError
from kgp.eval.baselines import bm25_retrieve, knn_retrieve, tfidf_retrieve
from kgp.eval.metrics import (
    answer_em,
    answer_f1,
    mean,
    normalize_answer,
    retrieval_precision,
    sf_coverage,
    sf_em,
    struct_em,
)
from kgp.eval.plots import plot_sweep
from kgp.eval.sweep import CSV_HEADER, SweepRow, density_sweep, write_sweep_csv
from kgp.eval.synthetic import QAInstance, SyntheticSpec, generate_synthetic_corpus, load_qa, save_qa
from kgp.graph.build import BuildParams, build_graph
from kgp.graph.model import EdgeKind
from kgp.text import default_stopwords
from oracles import words

# -- metrics ---------------------------------------------------------------------


def test_sf_em_cases():
    assert sf_em(["a", "b", "c"], ["a", "b"]) == 1
    assert sf_em(["a"], ["a", "b"]) == 0
    assert mean([1] * 7 + [0] * 3) == pytest.approx(0.7)
    with pytest.raises(InputError):
        sf_em(["a"], [])


def test_coverage_is_fractional():
    assert sf_coverage(["a", "x"], ["a", "b"]) == 0.5


def test_precision_cases():
    assert retrieval_precision(["a", "b"], ["a", "b"]) == 1.0
    assert retrieval_precision(["a", "b"], ["c"]) == 0.0
    retrieved = [f"p{i}" for i in range(30)]
    assert retrieval_precision(retrieved, ["p3", "p17", "zz"]) == pytest.approx(2 / 30, abs=1e-9)
    with pytest.raises(InputError):
        retrieval_precision([], ["a"])


def test_answer_metrics():
    assert (answer_em("Paris", "Paris"), answer_f1("Paris", "Paris")) == (1, 1.0)
    assert (answer_em("red car", "blue boat"), answer_f1("red car", "blue boat")) == (0, 0.0)
    assert answer_f1("march 28 1941", "1941") == pytest.approx(0.5, abs=1e-9)
    assert normalize_answer("The  Quick, brown fox!") == "quick brown fox"


def test_struct_em():
    md = "| a | b |\n|---|---|\n| 1 | 2 |"
    assert struct_em([md], md) == 1
    assert struct_em(["| x | y |\n|---|---|\n| 3 | 4 |"], md) == 0
    assert struct_em(["first passage.", "second passage."], "first passage.\nsecond passage.") == 1
    scores = [1] * 67 + [0] * 33
    assert mean(scores) == pytest.approx(0.67)


# -- baselines -------------------------------------------------------------------


def _toy_passages(n=20, seed=4):
    rng = random.Random(seed)
    vocab = [f"b{i}" for i in range(18)]
    return {f"p{i:02d}": " ".join(rng.choices(vocab, k=rng.randint(3, 14))) for i in range(n)}


def okapi(texts, question, k1=1.2, b=0.75):
    toks = {pid: words(t) for pid, t in texts.items()}
    n = len(toks)
    avgdl = sum(len(t) for t in toks.values()) / n
    qterms = [t for t in dict.fromkeys(words(question)) if t not in default_stopwords()]
    out = {}
    for pid, doc in toks.items():
        s = 0.0
        for t in qterms:
            f = doc.count(t)
            if not f:
                continue
            df = sum(1 for d in toks.values() if t in d)
            idf = math.log(1 + (n - df + 0.5) / (df + 0.5))
            s += idf * f * (k1 + 1) / (f + k1 * (1 - b + b * len(doc) / avgdl))
        out[pid] = s
    return out


def test_bm25_matches_okapi_oracle():
    texts = _toy_passages()
    q = "b2 b5 b5 b11"
    scores = okapi(texts, q)
    expected = sorted(texts, key=lambda p: (-scores[p], p))
    assert list(bm25_retrieve(texts, q, len(texts))) == expected


def test_bm25_trivial_cases():
    texts = {"b": "x y", "a": "x z", "c": "lonely harbor"}
    assert bm25_retrieve(texts, "harbor", 1) == ["c"]
    none = bm25_retrieve(texts, "absent", 3)
    assert none.fallback and list(none) == ["a", "b", "c"]


def test_tfidf_baseline_mirrors_seed_examples():
    texts = {"a": "orchestra played", "b": "clausen wrote", "c": "nothing"}
    assert tfidf_retrieve(texts, "clausen", 1) == ["b"]
    assert tfidf_retrieve(texts, "the of", 2).fallback


def test_knn_baseline():
    texts = _toy_passages(50, seed=9)
    provider = HashingProvider(128)
    emb = dict(zip(texts, provider.embed_batch(list(texts.values()))))
    assert knn_retrieve(emb, texts["p13"], provider, 1)[0] == "p13"
    full = knn_retrieve(emb, "b1 b2", provider, 80)
    assert full.truncated and len(full) == 50
    blended = knn_retrieve(emb, texts["p02"], provider, 6, texts=texts, lexical_blend=True)
    assert len(set(blended)) == 6 and blended[0] == "p02"


# -- synthetic corpora -----------------------------------------------------------


def test_generation_is_seeded():
    spec = SyntheticSpec(num_docs=6, seed=3, structured=True)
    a, qa = generate_synthetic_corpus(spec)
    b, qb = generate_synthetic_corpus(spec)
    assert a == b and qa == qb


def test_chain_length_sets_fact_count():
    _, qas = generate_synthetic_corpus(SyntheticSpec(num_docs=8, chain_length=3, seed=1))
    assert all(len(q.supporting_fact_ids) == 3 for q in qas)


def test_chain_is_connected_in_tfidf_graph():
    for seed in range(5):
        corpus, qas = generate_synthetic_corpus(SyntheticSpec(num_docs=10, chain_length=4, distractor_count=5, seed=seed))
        g = build_graph(corpus)
        for qa in qas:
            chain = qa.supporting_fact_ids
            for a, b in zip(chain, chain[1:]):
                assert g.has_edge(a, b, EdgeKind.LEXICAL), (seed, a, b)


def test_comparison_questions():
    _, qas = generate_synthetic_corpus(SyntheticSpec(num_docs=6, seed=2, comparison_fraction=1.0))
    for qa in qas:
        assert qa.question.startswith("Which was established first")
        assert qa.gold_answer in qa.question and len(qa.supporting_fact_ids) == 2


def test_qa_round_trip(tmp_path):
    _, qas = generate_synthetic_corpus(SyntheticSpec(num_docs=4, seed=5, structured=True))
    path = tmp_path / "qa.jsonl"
    save_qa(qas, path)
    assert load_qa(path) == qas
    assert any(isinstance(q, QAInstance) and q.structural_gold for q in qas)


def test_generator_validates_spec():
    with pytest.raises(ValueError):
        generate_synthetic_corpus(SyntheticSpec(chain_length=1))
    with pytest.raises(ValueError):
        generate_synthetic_corpus(SyntheticSpec(num_docs=2, chain_length=3))


# -- density sweeps --------------------------------------------------------------


@pytest.fixture(scope="module")
def sweep_data():
    return generate_synthetic_corpus(SyntheticSpec(num_docs=12, distractor_count=6, seed=21))


def test_single_grid_point(sweep_data):
    corpus, qas = sweep_data
    assert len(density_sweep(corpus, qas, "knn", [3])) == 1


def test_knn_degree_increases_with_k(sweep_data):
    corpus, qas = sweep_data
    rows = density_sweep(corpus, qas, "knn", [1, 2, 4, 8], repeats=1)
    degrees = [r.avg_degree for r in rows]
    assert all(a < b for a, b in zip(degrees, degrees[1:]))

    def inversions(xs, up):
        return sum(1 for a, b in zip(xs, xs[1:]) if (b < a if up else b > a))

    assert inversions([r.sf_em for r in rows], True) <= 1
    assert inversions([r.precision for r in rows], False) <= 1


def test_failed_grid_point_becomes_error_row(sweep_data, tmp_path):
    corpus, qas = sweep_data
    rows = density_sweep(corpus, qas, "tfidf", [0, 5], repeats=1)
    assert rows[0].error and rows[1].error is None
    path = tmp_path / "s.csv"
    write_sweep_csv(rows, path)
    with open(path, newline="") as fh:
        table = list(csv.reader(fh))
    assert table[0] == CSV_HEADER
    assert table[1] == ["tfidf", "m", "0", "", "", "", ""]
    assert table[2][:3] == ["tfidf", "m", "5"]


def test_unknown_sweep_method(sweep_data):
    corpus, qas = sweep_data
    with pytest.raises(ValueError):
        density_sweep(corpus, qas, "entity", [1])


def test_plot_writes_png(tmp_path):
    rows = [
        SweepRow("knn", ("k", k), avg_degree=k * 1.5, sf_em=min(1, 0.3 + 0.1 * k), precision=0.2 / k,
                 match_latency=1e-5 * k)
        for k in (1, 2, 4)
    ]
    rows.append(SweepRow("knn", ("k", 8), error="boom"))
    out = plot_sweep(rows, tmp_path / "fig.png")
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_sweep_uses_base_params(sweep_data):
    corpus, qas = sweep_data
    rows = density_sweep(corpus, qas, "knn", [2], base_params=BuildParams(mutual=True), repeats=1)
    mutual = build_graph(corpus, BuildParams(method="knn", knn_k=2, mutual=True))
    from kgp.graph.stats import graph_stats

    assert rows[0].avg_degree == graph_stats(mutual).avg_degree
