"""Exception hierarchy shared across the pipeline."""


class SpanforgeError(Exception):
    """Base class for all pipeline errors."""


class FormatError(SpanforgeError):
    """A corpus file is not well-formed (bad JSON or unexpected schema)."""


class DatasetValidationError(SpanforgeError):
    """A corpus violates a data invariant (bad span offsets, duplicate ids)."""


class MissingLabelError(SpanforgeError):
    """Labels were required but at least one question has none."""


class ContractError(SpanforgeError):
    """An operation was called outside its contract (e.g. training on
    unlabeled data, scoring against an empty gold list)."""


class ConfigError(SpanforgeError):
    """A configuration value violates its invariants."""


class TransportError(SpanforgeError):
    """An external reader process or socket is unreachable or died."""


class ReaderError(SpanforgeError):
    """An external reader answered with an error response."""


class LabelingAborted(SpanforgeError):
    """Pseudo-labeling aborted mid-run; carries a partial-progress report."""

    def __init__(self, message: str, progress: dict):
        super().__init__(message)
        self.progress = progress
