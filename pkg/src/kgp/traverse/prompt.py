from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Literal

from kgp.traverse.question import Question
from kgp.traverse.retrieve import RetrievalResult

_BUNDLED = {"with_context": "qac.txt", "no_context": "qa.txt"}


def load_template(template: str, path: str | Path | None = None) -> str:
    if path is not None:
        return Path(path).read_text(encoding="utf-8")
    try:
        name = _BUNDLED[template]
    except KeyError:
        raise ValueError(f"unknown template {template!r}") from None
    return resources.files("kgp.traverse").joinpath("templates", name).read_text(encoding="utf-8")


def context_lines(result: RetrievalResult) -> list[str]:
    items = list(result.context_texts) + list(result.structural_payloads)
    return [f"{i}. {text}" for i, text in enumerate(items, start=1)]


def format_prompt(
    question: Question | str,
    result: RetrievalResult | None = None,
    template: Literal["with_context", "no_context"] = "with_context",
    template_path: str | Path | None = None,
) -> str:
    """Render a QA prompt with numbered context entries (or none)."""
    text = question.text if isinstance(question, Question) else question
    body = load_template(template, template_path)
    if template == "with_context":
        lines = context_lines(result) if result is not None else []
        if not lines:
            raise ValueError("with_context prompt needs retrieved context or structural payloads")
        body = body.replace("{context}", "\n".join(lines))
    return body.replace("{question}", text)
