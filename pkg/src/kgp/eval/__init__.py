from kgp.eval.baselines import bm25_retrieve, knn_retrieve, tfidf_retrieve
from kgp.eval.metrics import (
    answer_em,
    answer_f1,
    normalize_answer,
    retrieval_precision,
    sf_coverage,
    sf_em,
    struct_em,
)
from kgp.eval.sweep import SweepRow, density_sweep, write_sweep_csv
from kgp.eval.synthetic import QAInstance, SyntheticSpec, generate_synthetic_corpus, load_qa, save_qa

__all__ = [
    "QAInstance",
    "SweepRow",
    "SyntheticSpec",
    "answer_em",
    "answer_f1",
    "bm25_retrieve",
    "density_sweep",
    "generate_synthetic_corpus",
    "knn_retrieve",
    "load_qa",
    "normalize_answer",
    "retrieval_precision",
    "save_qa",
    "sf_coverage",
    "sf_em",
    "struct_em",
    "tfidf_retrieve",
    "write_sweep_csv",
]
