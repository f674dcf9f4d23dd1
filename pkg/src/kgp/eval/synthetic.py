"""Deterministic synthetic multi-hop corpora with known supporting facts.

Every content question is a bridging chain: hop ``j`` mentions a link word
shared only with hop ``j+1``, and consecutive hops live in different
documents. The question names a head word found only in the first hop;
the answer word appears only in the last. Distractor passages draw from a
filler vocabulary that never overlaps link, head or answer words.
Optional comparison questions have two independent supporting facts.
The structured variant spreads passages over pages and adds tables, and
emits templated page/table questions with their exact gold content.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from kgp.corpus import Block, Corpus, Document, Page, passage_id
from kgp.graph.build import parse_table, table_markdown
from kgp.text import default_stopwords

_ONSETS = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "kr", "st", "tr", "ch", "sh"]
_VOWELS = ["a", "e", "i", "o", "u", "ai", "ou", "ea"]
_CODAS = ["", "", "n", "r", "s", "l", "k", "m", "x"]


@dataclass
class QAInstance:
    question: str
    gold_answer: str
    supporting_fact_ids: list[str]
    structural_gold: str | None = None

    def to_json(self) -> dict:
        out = {"question": self.question, "answer": self.gold_answer, "sf_ids": list(self.supporting_fact_ids)}
        if self.structural_gold is not None:
            out["structural_gold"] = self.structural_gold
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "QAInstance":
        return cls(obj["question"], obj.get("answer", ""), list(obj.get("sf_ids", [])), obj.get("structural_gold"))


@dataclass(frozen=True)
class SyntheticSpec:
    num_docs: int = 10
    chain_length: int = 2
    distractor_count: int = 4
    seed: int = 0
    num_questions: int | None = None
    comparison_fraction: float = 0.0
    structured: bool = False
    pages_per_doc: int = 2
    tables_per_doc: int = 1
    filler_words_per_doc: int = 30


class _Words:
    """Unique pseudo-words drawn from a seeded RNG."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.used: set[str] = set(default_stopwords())

    def take(self) -> str:
        while True:
            n = self.rng.choice([2, 2, 3])
            w = "".join(
                self.rng.choice(_ONSETS) + self.rng.choice(_VOWELS) + self.rng.choice(_CODAS) for _ in range(n)
            )
            if w not in self.used:
                self.used.add(w)
                return w


@dataclass
class _Fact:
    text: str
    question: int  # index of owning question, -1 for distractors
    order: int  # position within the question's supporting facts


@dataclass
class _DocDraft:
    doc_id: str
    title: str
    facts: list[_Fact] = field(default_factory=list)


def _filler(rng: random.Random, pool: list[str], n: int) -> str:
    return " ".join(rng.choice(pool) for _ in range(n))


def generate_synthetic_corpus(spec: SyntheticSpec) -> tuple[Corpus, list[QAInstance]]:
    if spec.chain_length < 2:
        raise ValueError("chain_length must be >= 2")
    if spec.num_docs < spec.chain_length:
        raise ValueError("num_docs must be >= chain_length (hops live in distinct documents)")
    rng = random.Random(spec.seed)
    words = _Words(rng)
    pool = [words.take() for _ in range(max(40, spec.filler_words_per_doc * spec.num_docs))]
    docs = [
        _DocDraft(f"d{i:03d}", f"{words.take().capitalize()} {words.take().capitalize()}")
        for i in range(spec.num_docs)
    ]
    n_questions = spec.num_questions if spec.num_questions is not None else spec.num_docs
    questions: list[tuple[str, str]] = []

    for qi in range(n_questions):
        if rng.random() < spec.comparison_fraction:
            heads = [words.take().capitalize() for _ in range(2)]
            years = rng.sample(range(1800, 2000), 2)
            for order, (h, y, d) in enumerate(zip(heads, years, rng.sample(docs, 2))):
                text = f"{h} was established in {y} near {_filler(rng, pool, 2)}. {_filler(rng, pool, 4)}."
                d.facts.append(_Fact(text, qi, order))
            answer = heads[0] if years[0] < years[1] else heads[1]
            questions.append((f"Which was established first, {heads[0]} or {heads[1]}?", answer))
            continue
        head = words.take().capitalize()
        answer = words.take().capitalize()
        links = [words.take() for _ in range(spec.chain_length - 1)]
        hosts = rng.sample(docs, spec.chain_length)
        for j, d in enumerate(hosts):
            f1, f2 = _filler(rng, pool, 3), _filler(rng, pool, 3)
            # each link word occurs three times on both sides of its hop, which keeps it
            # among the top tf-idf keywords of both host documents
            if j == 0:
                l0 = links[0]
                text = f"{head} is known for the {l0} project {f1}. The {l0} was {f2}. The {l0} project endured."
            elif j == spec.chain_length - 1:
                lk = links[-1]
                text = f"The {lk} was created by a person born in {answer}. The {lk} was {f1}. The {lk} {f2}."
            else:
                lp, ln = links[j - 1], links[j]
                text = (
                    f"The {lp} project led to {ln} {f1}. The {lp} and {ln} were {f2}. "
                    f"The {lp} shaped {ln}."
                )
            d.facts.append(_Fact(text, qi, j))
        questions.append((f"Where was the creator behind the work of {head} born?", answer))

    for d in docs:
        # every document needs at least one passage
        for _ in range(max(spec.distractor_count, 0 if d.facts else 1)):
            d.facts.append(_Fact(f"{d.title} {_filler(rng, pool, 5)}. {_filler(rng, pool, 6)}.", -1, 0))
        rng.shuffle(d.facts)

    documents: list[Document] = []
    sf_ids: dict[int, list[tuple[int, str]]] = {}
    struct_qas: list[QAInstance] = []
    for d in docs:
        n_pages = spec.pages_per_doc if spec.structured else 1
        page_blocks: list[list[Block]] = [[] for _ in range(n_pages)]
        for ordinal, fact in enumerate(d.facts):
            page_blocks[ordinal * n_pages // max(len(d.facts), 1)].append(Block("text", fact.text))
            if fact.question >= 0:
                sf_ids.setdefault(fact.question, []).append((fact.order, passage_id(d.doc_id, ordinal)))
        if spec.structured:
            for t in range(1, spec.tables_per_doc + 1):
                header = ["Item", "Value"]
                rows = [[words.take(), str(rng.randint(1, 999))] for _ in range(rng.randint(2, 4))]
                content = "\n".join(",".join(r) for r in [header] + rows)
                page_blocks[(t - 1) % n_pages].append(Block("table", content, table_id=t))
                struct_qas.append(
                    QAInstance(
                        f"In Table {t} of {d.title}, what is the value for {rows[0][0]}?",
                        rows[0][1],
                        [],
                        table_markdown(parse_table(content)),
                    )
                )
            for p, blocks in enumerate(page_blocks, start=1):
                texts = [b.content for b in blocks if b.kind == "text"]
                if texts:
                    struct_qas.append(
                        QAInstance(f"What is on Page {p} of {d.title}?", texts[0], [], "\n".join(texts))
                    )
        pages = tuple(Page(i, tuple(b)) for i, b in enumerate(page_blocks, start=1) if b)
        documents.append(Document(d.doc_id, d.title, pages))

    qas = [
        QAInstance(q, a, [pid for _, pid in sorted(sf_ids[qi])]) for qi, (q, a) in enumerate(questions)
    ]
    corpus = Corpus(tuple(documents)).split()
    return corpus, qas + struct_qas


def save_qa(instances: Iterable[QAInstance], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for qa in instances:
            fh.write(json.dumps(qa.to_json()) + "\n")


def load_qa(path: str | Path) -> list[QAInstance]:
    with open(path, encoding="utf-8") as fh:
        return [QAInstance.from_json(json.loads(line)) for line in fh if line.strip()]
