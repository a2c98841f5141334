"""
Error types for motionprint

Every failure raised by the library carries a stable ``reason`` string and the exit
code the command-line tool reports for it.
"""


class MotionPrintError(Exception):
    """Base class for all motionprint errors"""

    reason = "error"
    exit_code = 1

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message

    def one_line(self) -> str:
        """Machine-parseable single line for the diagnostic stream"""
        text = " ".join(str(self.message).split())
        return f"error: {self.reason}: {text}"


class ValidationError(MotionPrintError, ValueError):
    """Input, configuration or state that violates a contract"""

    reason = "validation"
    exit_code = 1


class InvalidInputError(ValidationError):
    reason = "invalid-input"


class SequenceTooShortError(ValidationError):
    reason = "sequence-too-short"


class DegeneratePoseError(ValidationError):
    reason = "degenerate-pose"


class ConfigMismatchError(ValidationError):
    reason = "config-mismatch"


class InsufficientDataError(ValidationError):
    reason = "insufficient-data"


class RevivalStarvedError(ValidationError):
    reason = "revival-starved"


class EmptySequenceError(ValidationError):
    reason = "empty-sequence"


class VocabularyOverflowError(ValidationError):
    reason = "vocabulary-overflow"


class UndefinedVarianceError(ValidationError):
    reason = "undefined-variance"


class DuplicateIdError(ValidationError):
    reason = "duplicate-id"


class EmptyProtocolError(ValidationError):
    reason = "empty-protocol"


class InvalidWeightsError(ValidationError):
    reason = "invalid-weights"


class FormatError(ValidationError):
    """Malformed artefact file; ``line`` is 1-based for JSON Lines inputs"""

    reason = "format"

    def __init__(self, message: str, line: int = None, path: str = None):
        where = ""
        if path:
            where += f"{path}"
        if line is not None:
            where += f"{':' if where else 'line '}{line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.line = line
        self.path = path


class UsageError(ValidationError):
    reason = "usage"


class ArtifactIOError(MotionPrintError):
    """A file could not be read or written"""

    reason = "io"
    exit_code = 2


def as_number(name: str, value, integer: bool = False, optional: bool = False):
    """Config value as float (or int), raising InvalidInputError for anything else"""
    if value is None and optional:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidInputError(f"{name} must be a number, got {value!r}")
    if isinstance(value, float) and not -float("inf") < value < float("inf"):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise InvalidInputError(f"{name} must be an integer, got {value!r}")
        return int(value)
    return float(value)
