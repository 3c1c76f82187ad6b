"""Exception types shared across the package."""

from __future__ import annotations


class AceError(Exception):
    """Base class for every error this package raises deliberately."""


class EmptyQuestionError(AceError):
    pass


class EmptyMemoryError(AceError):
    pass


class MissingQueryItemError(AceError):
    """Working memory lacks its originating question item."""


class EmptyVotesError(AceError):
    pass


class BackendError(AceError):
    """A completion call failed."""


class TransportError(BackendError):
    """Network-level failure that survived all retry attempts."""


class ProviderStatusError(BackendError):
    """The provider answered with a non-success status."""

    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


class RuleSetError(AceError):
    """A scripted rule file could not be loaded."""


class CommitteeError(BackendError):
    """A vote call failed; carries the votes collected before the failure."""

    def __init__(self, message: str, votes=()):
        super().__init__(message)
        self.votes = tuple(votes)


class EmptySubQueryError(AceError):
    pass


class EmptySubAnswerError(AceError):
    pass


class EmptyAnswerError(AceError):
    pass


class CorpusFormatError(AceError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DuplicateDocIdError(AceError):
    def __init__(self, doc_id: str, line_number: int):
        super().__init__(f"line {line_number}: duplicate doc_id {doc_id!r}")
        self.doc_id = doc_id
        self.line_number = line_number


class EmptyCorpusError(AceError):
    pass


class EmptyQueryError(AceError):
    """Query text tokenized to nothing."""


class DatasetFormatError(AceError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EmptyResultsError(AceError):
    pass


class TraceFormatError(AceError):
    pass


class IndexFormatError(AceError):
    """A persisted index file is unreadable or from an unknown schema."""


class ConfigError(AceError):
    """Invalid CLI flags, config file contents, or missing credentials."""
