"""
Exception hierarchy for the correction framework.
"""


class PhocoError(Exception):
    """Base class for every error raised by the framework."""


class NumberRangeError(PhocoError, ValueError):
    """A number falls outside the range the Spanish cardinal reader supports."""


class EmptyReferenceError(PhocoError, ValueError):
    """WER requested against an empty reference."""


class G2PCoverageError(PhocoError, LookupError):
    """A grapheme-to-phoneme table has no rule for a character it must cover."""


class TrainingDivergedError(PhocoError, RuntimeError):
    """The training loss became NaN or infinite."""


class ModelFormatError(PhocoError, ValueError):
    """A saved gate model is malformed or has inconsistent shapes."""


class EmptyDatasetError(PhocoError, ValueError):
    """An operation that needs at least one record received none."""


class InvalidReductionBaseError(PhocoError, ValueError):
    """Relative reduction requested against a non-positive base."""
