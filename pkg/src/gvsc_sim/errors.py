"""Exception types shared across the simulator."""


class GvscError(Exception):
    """Base class for simulator errors."""


class FormatError(GvscError, ValueError):
    """Malformed fixture or container file."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class FramingError(GvscError, ValueError):
    """Sequence length does not fit the framing of a codec or mapper."""


class ConfigurationError(GvscError, ValueError):
    """Invalid or inconsistent configuration."""


class DomainError(GvscError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ShapeError(GvscError, ValueError):
    """Array shapes do not match."""


class ContractError(GvscError, RuntimeError):
    """A plug-in violated its interface contract."""


class UnsupportedRegimeError(GvscError, ValueError):
    """Operating point outside the range a configuration table covers."""
