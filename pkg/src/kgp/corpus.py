"""Document ingestion and passage splitting.

Structured corpora are JSON files following::

    {"documents": [{"doc_id": str, "title": str,
                    "pages": [{"page_number": int,
                               "blocks": [{"kind": "text"|"table",
                                           "content": str,
                                           "table_id": int?}]}]}]}

Table content is a CSV grid (one line per row). Plain corpora are ``.txt``
files, one document per file, titled by the file stem.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Literal

from kgp.errors import DuplicateIdError, EmptyDocumentError, ValidationError
from kgp.text import whitespace_tokens

DEFAULT_PASSAGE_BUDGET = 250

_SENTENCE_END = re.compile(r"[.!?][\"')\]]*$")


@dataclass(frozen=True)
class Block:
    kind: Literal["text", "table"]
    content: str
    table_id: int | None = None


@dataclass(frozen=True)
class Page:
    page_number: int
    blocks: tuple[Block, ...]


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    pages: tuple[Page, ...] = ()
    raw_text: str | None = None

    def text_blocks(self) -> Iterable[tuple[int, Block]]:
        for page in self.pages:
            for block in page.blocks:
                if block.kind == "text":
                    yield page.page_number, block

    def tables(self) -> Iterable[tuple[int, Block]]:
        for page in self.pages:
            for block in page.blocks:
                if block.kind == "table":
                    yield page.page_number, block


@dataclass(frozen=True)
class Passage:
    passage_id: str
    doc_id: str
    page_number: int | None
    text: str
    token_count: int


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    passages: tuple[Passage, ...] = ()
    passage_length_budget: int = DEFAULT_PASSAGE_BUDGET
    _by_id: dict[str, Document] = field(default=None, init=False, repr=False, compare=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        by_id: dict[str, Document] = {}
        for doc in self.documents:
            if doc.doc_id in by_id:
                raise DuplicateIdError(doc.doc_id)
            by_id[doc.doc_id] = doc
        object.__setattr__(self, "_by_id", by_id)

    def document(self, doc_id: str) -> Document:
        return self._by_id[doc_id]

    def split(self, budget: int | None = None) -> "Corpus":
        """Return a copy with passages split at ``budget`` tokens."""
        budget = budget or self.passage_length_budget
        passages: list[Passage] = []
        for doc in self.documents:
            passages.extend(split_passages(doc, budget))
        return replace(self, passages=tuple(passages), passage_length_budget=budget)

    def passages_of(self, doc_id: str) -> list[Passage]:
        return [p for p in self.passages if p.doc_id == doc_id]


def passage_id(doc_id: str, ordinal: int) -> str:
    return f"{doc_id}#{ordinal}"


def _sentences(tokens: list[str]) -> list[list[str]]:
    out: list[list[str]] = []
    cur: list[str] = []
    for tok in tokens:
        cur.append(tok)
        if _SENTENCE_END.search(tok):
            out.append(cur)
            cur = []
    if cur:
        out.append(cur)
    return out


def _chunk(tokens: list[str], budget: int) -> list[list[str]]:
    """Greedy packing of one block's sentences into chunks of at most ``budget`` tokens.

    A sentence longer than the budget is hard-broken.
    """
    chunks: list[list[str]] = []
    cur: list[str] = []
    for sent in _sentences(tokens):
        if len(cur) + len(sent) <= budget:
            cur.extend(sent)
            continue
        if cur:
            chunks.append(cur)
            cur = []
        while len(sent) > budget:
            chunks.append(sent[:budget])
            sent = sent[budget:]
        cur = list(sent)
    if cur:
        chunks.append(cur)
    return chunks


def split_passages(doc: Document, budget: int = DEFAULT_PASSAGE_BUDGET) -> list[Passage]:
    """Split a document's text blocks into passages of at most ``budget`` tokens.

    Each text block (paragraph) is chunked on its own, so passages never
    span blocks or pages; tables are skipped (they become table nodes in
    the graph).
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    blocks: list[tuple[int, list[str]]] = []
    if doc.pages:
        for page_number, block in doc.text_blocks():
            blocks.append((page_number, whitespace_tokens(block.content)))
    elif doc.raw_text:
        blocks.extend((1, whitespace_tokens(p)) for p in paragraphs(doc.raw_text))

    passages: list[Passage] = []
    for page_number, tokens in blocks:
        for chunk in _chunk(tokens, budget):
            passages.append(
                Passage(
                    passage_id=passage_id(doc.doc_id, len(passages)),
                    doc_id=doc.doc_id,
                    page_number=page_number,
                    text=" ".join(chunk),
                    token_count=len(chunk),
                )
            )
    if not passages:
        raise EmptyDocumentError(f"document {doc.doc_id!r} has no text tokens")
    return passages


# -- (de)serialization -----------------------------------------------------------


def _require(obj: Any, key: str, typ: type | tuple[type, ...], source: str, path: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise ValidationError(source, f"{path}.{key}", "missing")
    val = obj[key]
    if typ is int and isinstance(val, bool):
        raise ValidationError(source, f"{path}.{key}", "expected int")
    if not isinstance(val, typ):
        name = typ.__name__ if isinstance(typ, type) else "/".join(t.__name__ for t in typ)
        raise ValidationError(source, f"{path}.{key}", f"expected {name}")
    return val


def block_from_dict(obj: Any, source: str = "<input>", path: str = "block") -> Block:
    kind = _require(obj, "kind", str, source, path)
    if kind not in ("text", "table"):
        raise ValidationError(source, f"{path}.kind", f"unknown kind {kind!r}")
    content = _require(obj, "content", str, source, path)
    if not content.strip():
        raise ValidationError(source, f"{path}.content", "empty")
    table_id = obj.get("table_id")
    if kind == "table":
        table_id = _require(obj, "table_id", int, source, path)
        if table_id < 1:
            raise ValidationError(source, f"{path}.table_id", "must be >= 1")
    elif table_id is not None:
        raise ValidationError(source, f"{path}.table_id", "only allowed on table blocks")
    return Block(kind=kind, content=content, table_id=table_id)


def document_from_dict(obj: Any, source: str = "<input>", path: str = "document") -> Document:
    doc_id = _require(obj, "doc_id", str, source, path)
    if not doc_id:
        raise ValidationError(source, f"{path}.doc_id", "empty")
    title = _require(obj, "title", str, source, path)
    if not title.strip():
        raise ValidationError(source, f"{path}.title", "empty")
    raw_pages = _require(obj, "pages", list, source, path)
    pages: list[Page] = []
    table_ids: set[int] = set()
    last = 0
    for i, rp in enumerate(raw_pages):
        ppath = f"{path}.pages[{i}]"
        number = _require(rp, "page_number", int, source, ppath)
        if number < 1:
            raise ValidationError(source, f"{ppath}.page_number", "must be >= 1")
        if number <= last:
            raise ValidationError(source, f"{ppath}.page_number", "pages must be strictly increasing")
        last = number
        raw_blocks = _require(rp, "blocks", list, source, ppath)
        if not raw_blocks:
            raise ValidationError(source, f"{ppath}.blocks", "empty")
        blocks = tuple(
            block_from_dict(b, source, f"{ppath}.blocks[{j}]") for j, b in enumerate(raw_blocks)
        )
        for j, b in enumerate(blocks):
            if b.table_id is not None:
                if b.table_id in table_ids:
                    raise ValidationError(source, f"{ppath}.blocks[{j}].table_id", f"duplicate table {b.table_id}")
                table_ids.add(b.table_id)
        pages.append(Page(page_number=number, blocks=blocks))
    raw_text = obj.get("raw_text")
    return Document(doc_id=doc_id, title=title, pages=tuple(pages), raw_text=raw_text)


def document_to_dict(doc: Document) -> dict[str, Any]:
    out: dict[str, Any] = {
        "doc_id": doc.doc_id,
        "title": doc.title,
        "pages": [
            {
                "page_number": p.page_number,
                "blocks": [
                    {"kind": b.kind, "content": b.content}
                    | ({"table_id": b.table_id} if b.table_id is not None else {})
                    for b in p.blocks
                ],
            }
            for p in doc.pages
        ],
    }
    if doc.raw_text is not None:
        out["raw_text"] = doc.raw_text
    return out


def corpus_from_dict(obj: Any, source: str = "<input>") -> Corpus:
    docs_raw = _require(obj, "documents", list, source, "$")
    docs = [document_from_dict(d, source, f"documents[{i}]") for i, d in enumerate(docs_raw)]
    return Corpus(documents=tuple(docs))


def corpus_to_dict(corpus: Corpus) -> dict[str, Any]:
    return {"documents": [document_to_dict(d) for d in corpus.documents]}


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(json.dumps(corpus_to_dict(corpus), indent=1), encoding="utf-8")


def _structured_files(path: Path) -> list[Path]:
    return sorted(path.glob("*.json")) if path.is_dir() else [path]


def paragraphs(text: str) -> list[str]:
    return [p.strip() for p in re.split(r"\n\s*\n", text) if p.strip()]


def _plain_document(path: Path) -> Document:
    text = path.read_text(encoding="utf-8")
    blocks = tuple(Block("text", p) for p in paragraphs(text))
    page = Page(page_number=1, blocks=blocks) if blocks else None
    return Document(
        doc_id=path.stem,
        title=path.stem,
        pages=(page,) if page else (),
        raw_text=text,
    )


def load_corpus(
    path: str | Path,
    format: Literal["structured", "plain"] = "structured",
    *,
    split: bool = False,
    budget: int = DEFAULT_PASSAGE_BUDGET,
) -> Corpus:
    """Load a corpus from a JSON file/directory or from ``.txt`` files.

    Passages are left empty unless ``split`` is set.
    """
    path = Path(path)
    docs: list[Document] = []
    if format == "structured":
        for f in _structured_files(path):
            try:
                obj = json.loads(f.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise ValidationError(str(f), "$", f"invalid JSON: {exc}") from exc
            docs.extend(corpus_from_dict(obj, str(f)).documents)
    elif format == "plain":
        files = sorted(path.glob("*.txt")) if path.is_dir() else [path]
        docs = [_plain_document(f) for f in files]
    else:
        raise ValueError(f"unknown corpus format {format!r}")
    corpus = Corpus(documents=tuple(docs), passage_length_budget=budget)
    return corpus.split(budget) if split else corpus
