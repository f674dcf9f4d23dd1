"""Exception hierarchy shared by every kgp module."""

from __future__ import annotations


class KGPError(Exception):
    """Base class for all kgp errors."""


class ValidationError(KGPError, ValueError):
    def __init__(self, source: str, field: str, message: str):
        self.source = source
        self.field = field
        super().__init__(f"{source}: {field}: {message}")


class DuplicateIdError(KGPError, ValueError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(doc_id)


class EmptyDocumentError(KGPError, ValueError):
    pass


class EmptyCorpusError(KGPError, ValueError):
    pass


class InconsistentInputError(KGPError, ValueError):
    pass


class DimensionError(KGPError, ValueError):
    pass


class MissingEmbeddingError(KGPError, KeyError):
    pass


class ExtractionError(KGPError):
    def __init__(self, passage_id: str, cause: BaseException | None = None):
        self.passage_id = passage_id
        msg = f"entity extraction failed on {passage_id}"
        if cause is not None:
            msg += f": {cause}"
        super().__init__(msg)


class StructureError(KGPError, ValueError):
    pass


class IdError(KGPError, LookupError):
    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(doc_id)

    def __str__(self) -> str:
        return self.doc_id


class DeserializationError(KGPError, ValueError):
    pass


class InputError(KGPError, ValueError):
    pass


class ProviderError(KGPError):
    """A remote provider failed after exhausting its retries."""

    def __init__(self, message: str, attempts: int = 1, status: int | None = None):
        self.attempts = attempts
        self.status = status
        super().__init__(f"{message} (attempts={attempts}, status={status})")


class ExhaustedCandidatesError(KGPError):
    pass


class EmptyGraphError(KGPError, ValueError):
    pass


class StructureNotFoundError(KGPError, LookupError):
    def __init__(self, kind: str, ordinal: int):
        self.kind = kind
        self.ordinal = ordinal
        super().__init__(f"{kind} {ordinal}")

    def __str__(self) -> str:
        return f"{self.kind} {self.ordinal}"
