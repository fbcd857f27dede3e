"""Exception types shared across the package.

Domain errors (bad input data, constraint violations) derive from
FactGraphError so callers can distinguish them from programming errors.
"""


class FactGraphError(Exception):
    """Base class for all domain errors raised by this package."""


class TermError(FactGraphError):
    """A term is invalid (empty after normalization)."""


class ParseError(FactGraphError):
    """Malformed N-Triples input. Carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class CsvFormatError(FactGraphError):
    """CSV header is missing a required column."""


class SnapshotError(FactGraphError):
    """Snapshot directory is missing, corrupt, or has an unknown format version."""


class FilterError(FactGraphError):
    """A media filter violates its invariants (empty, or inverted range)."""


class MediaError(FactGraphError):
    """A media item fails validation (empty title, bad date, ...)."""


class TranscriptError(FactGraphError):
    """Malformed transcript cue. Carries the 0-based cue index."""

    def __init__(self, cue_index: int, message: str):
        super().__init__(f"cue {cue_index}: {message}")
        self.cue_index = cue_index


class ExternalToolError(FactGraphError):
    """External extraction tool failed; message carries a stderr excerpt."""


class ExtractorError(FactGraphError):
    """LLM extractor transport failure after exhausting retries."""


class UnparseableResponseError(ExtractorError):
    """LLM response could not be parsed as a triple array. Carries the raw text."""

    def __init__(self, message: str, raw_response: str):
        super().__init__(message)
        self.raw_response = raw_response


class JournalError(FactGraphError):
    """Journal file is corrupt (undecodable record before the final line)."""


class LexiconError(FactGraphError):
    """Lexicon file is malformed or contains a non-fixed-point canonical."""


class ReviewError(FactGraphError):
    """Illegal review-status transition or invalid review action."""


class ScoringError(FactGraphError):
    """Scoring configuration or input violates a constraint."""


class ConfigError(FactGraphError):
    """Application configuration file is invalid."""
