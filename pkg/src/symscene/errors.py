"""Exception hierarchy shared across the toolkit."""


class SymsceneError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(SymsceneError, ValueError):
    """An argument violates a documented precondition or invariant."""


class ConfigError(SymsceneError, ValueError):
    """A configuration value violates the configuration invariants."""


class ParseError(SymsceneError, ValueError):
    """An input file could not be parsed; carries a line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EncodingError(SymsceneError):
    """Per-object encoding failure; carries the offending object index."""

    def __init__(self, message: str, object_index: int | None = None):
        if object_index is not None:
            message = f"object {object_index}: {message}"
        super().__init__(message)
        self.object_index = object_index


class UndefinedMetricError(SymsceneError):
    """A metric is undefined for the given inputs (e.g. zero ground truth)."""


class FrameError(SymsceneError):
    """Base class for wire-frame decoding failures."""


class ProtocolError(FrameError):
    """Structurally invalid frame: bad magic, field value, or text encoding."""


class VersionError(FrameError):
    """Frame declares an unsupported protocol version."""


class DimensionError(FrameError):
    """Frame declares a vector dimension other than the fixed wire dimension."""


class TruncationError(FrameError):
    """Frame ends before its declared contents do."""

    def __init__(self, message: str, expected: int, actual: int):
        super().__init__(f"{message}: expected {expected} bytes, have {actual}")
        self.expected = expected
        self.actual = actual


class TrailingDataError(FrameError):
    """Frame is followed by bytes not accounted for by its declared parts."""


class TransportError(SymsceneError):
    """Client-side connection failure; carries the frame index reached."""

    def __init__(self, message: str, frame_index: int):
        super().__init__(f"frame {frame_index}: {message}")
        self.frame_index = frame_index
