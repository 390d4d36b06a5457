"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
NumericalError -> 3.
"""


class TopicFilterError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(TopicFilterError):
    """Invalid configuration value, flag combination, or config file."""


class DataError(TopicFilterError):
    """Input data is malformed, inconsistent, or insufficient."""


class ParseError(DataError):
    """Malformed record in an input stream; carries the location."""

    def __init__(self, message, *, source=None, line=None, offset=None, record=None):
        self.source = source
        self.line = line
        self.offset = offset
        self.record = record
        where = []
        if source is not None:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte {offset}")
        if record is not None:
            where.append(f"record {record}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class DuplicateDocumentError(DataError):
    """Two documents in one collection share a doc_id."""


class EmptyCollectionError(DataError):
    """An operation that needs documents received none."""


class EmptyCandidatesError(DataError):
    """Candidate mining filtered every term away."""


class SingleClassError(DataError):
    """A training set must contain both relevant and irrelevant examples."""


class NoRelevantDocumentsError(DataError):
    """A topic has no relevant document available for training."""


class NumericalError(TopicFilterError):
    """A numerical procedure failed or left its valid domain."""


class DegenerateVectorError(NumericalError):
    """A vector with (near-)zero norm where a direction is required."""


class DivergenceError(NumericalError):
    """Training produced a non-finite loss."""


class EmptyVocabularyWarning(UserWarning):
    """The probe cut kept zero terms; callers may fall back to a clamp."""
