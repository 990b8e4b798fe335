"""Exception hierarchy shared across the package."""


class AdvemojiError(Exception):
    """Base class for all library errors."""


class LexiconError(AdvemojiError):
    """Malformed lexicon file, duplicate surface, or empty sentiment class."""


class ParseError(AdvemojiError):
    """Input text is not valid Unicode (unpaired surrogates)."""


class DatasetError(AdvemojiError):
    """Malformed benchmark dataset."""


class CheckpointError(AdvemojiError):
    """Unreadable or incompatible policy checkpoint."""


class OracleError(AdvemojiError):
    """Transport-level failure talking to a classifier oracle."""


class ProtocolError(OracleError):
    """Remote oracle replied, but the reply violates the wire protocol."""


class AbstentionError(OracleError):
    """LLM oracle reply matched zero or more than one label."""


class AttackError(AdvemojiError):
    """Attack aborted mid-run; carries the partial query count."""

    def __init__(self, message: str, queries: int = 0):
        super().__init__(message)
        self.queries = queries
