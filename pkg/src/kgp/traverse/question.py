from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Literal, Protocol

log = logging.getLogger(__name__)

_STRUCT_RE = re.compile(r"\b(page|table)\s+(\d+)\b", re.IGNORECASE)

StructureRef = tuple[Literal["page", "table"], int]


@dataclass(frozen=True)
class Question:
    text: str
    kind: Literal["content", "structural"] = "content"
    structure_refs: tuple[StructureRef, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind == "structural" and not self.structure_refs:
            raise ValueError("structural questions need at least one structure reference")
        if self.kind == "content" and self.structure_refs:
            raise ValueError("content questions carry no structure references")


class QuestionClassifier(Protocol):
    def classify(self, text: str) -> str:
        """Return ``"structural"`` or ``"content"``."""


def structure_refs(text: str) -> tuple[StructureRef, ...]:
    return tuple((m.group(1).lower(), int(m.group(2))) for m in _STRUCT_RE.finditer(text))  # type: ignore[misc]


def classify_question(text: str, classifier: QuestionClassifier | None = None) -> Question:
    """Label a question as structural (mentions ``page N``/``table N``) or content.

    A configured classifier's label wins, but structure references always
    come from the pattern match; a structural label without any reference
    falls back to the pattern result.
    """
    if not text or not text.strip():
        raise ValueError("question text is empty")
    refs = structure_refs(text)
    kind = "structural" if refs else "content"
    if classifier is not None:
        try:
            label = classifier.classify(text).strip().lower()
        except Exception as exc:  # noqa: BLE001
            log.warning("remote classifier failed, using pattern result: %s", exc)
        else:
            if label == "content":
                kind, refs = "content", ()
            elif label == "structural" and refs:
                kind = "structural"
            else:
                log.warning("classifier label %r unusable, using pattern result", label)
    return Question(text=text, kind=kind, structure_refs=refs)
