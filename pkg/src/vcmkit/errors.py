"""Exception types shared across the package.

Every failure surfaced to callers is an instance of :class:`VcmkitError`,
so CLI and pipeline code can distinguish domain errors from genuine bugs.
"""


class VcmkitError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(VcmkitError, ValueError):
    """A frame or sequence has the wrong color format or dimensions for an operation."""


class ArgumentError(VcmkitError, ValueError):
    """A scalar argument is outside its valid range."""


class BitstreamError(VcmkitError):
    """Base class for coded-stream parse failures."""


class BadMagicError(BitstreamError):
    """The stream does not start with the expected magic bytes."""


class TruncatedPayloadError(BitstreamError):
    """The stream ended before all coded data could be read."""


class TrailingDataError(BitstreamError):
    """Extra bytes or nonzero padding bits follow the coded data."""


class CodecTemplateError(VcmkitError, ValueError):
    """An external-codec command template is missing or misusing a placeholder."""


class ExternalCodecError(VcmkitError):
    """An external encoder/decoder process failed.

    Carries the exit status and captured process output when available.
    """

    def __init__(self, message: str, returncode: int | None = None,
                 stdout: str = "", stderr: str = ""):
        super().__init__(message)
        self.returncode = returncode
        self.stdout = stdout
        self.stderr = stderr


class DataIOError(VcmkitError):
    """Base class for file reading/writing failures."""


class SizeMismatchError(DataIOError):
    """A raw video file's size is inconsistent with the declared dimensions."""


class AnnotationError(DataIOError):
    """Base class for annotation/detection JSON problems."""


class MalformedJsonError(AnnotationError):
    """The file is not valid JSON."""


class MissingKeyError(AnnotationError):
    """A required key is absent from the JSON document."""


class InvalidBoxError(AnnotationError):
    """A bounding box has nonpositive extents or malformed coordinates."""


class SchemaError(AnnotationError):
    """A JSON value has the wrong type or an unexpected field."""


class ConfigError(DataIOError, ValueError):
    """An experiment configuration is malformed: unknown key, wrong type, or constraint violation."""


class InsufficientPointsError(VcmkitError, ValueError):
    """A rate-distortion curve has too few points for the requested operation."""


class DisjointRangesError(VcmkitError, ValueError):
    """Two curves' quality ranges do not overlap."""
