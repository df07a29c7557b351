"""
EVENT DETECTOR - Exceptions
================================
Every error the detector raises on purpose lives here.

WHY ONE FILE?
- Management commands catch DetectorError and turn it into an exit code
- Tests can assert on the precise failure
- Each class also inherits the closest built-in (ValueError, KeyError...)
  so plain Python callers keep working
"""

from django.core.exceptions import ImproperlyConfigured


class DetectorError(Exception):
    """Base class for all detector failures"""


class DimensionError(DetectorError, ValueError):
    """Tensor shapes do not line up"""


class ArgumentError(DetectorError, ValueError):
    """An argument is outside its allowed range (empty list, bad rate, unknown switch)"""


class StateError(DetectorError, RuntimeError):
    """An object is not in the state the operation needs (e.g. no gradient yet)"""


class VocabularyError(DetectorError, KeyError):
    """Unknown tag, event type or dependency label"""

    def __str__(self):
        # KeyError quotes its message; we want it readable
        return str(self.args[0]) if self.args else ""


class CorpusFormatError(DetectorError, ValueError):
    """
    A corpus line could not be parsed

    Args:
        line_number: 1-based line in the corpus file
        message: What went wrong
    """

    def __init__(self, line_number, message):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class EmbeddingFormatError(DetectorError, ValueError):
    """The embedding text file does not match the expected layout"""


class TrainingAborted(DetectorError, RuntimeError):
    """Training hit a non-finite loss"""


class CheckpointError(DetectorError, ValueError):
    """A checkpoint file is unreadable or inconsistent"""


class ConfigError(ImproperlyConfigured):
    """Unknown config key or a value out of range"""
