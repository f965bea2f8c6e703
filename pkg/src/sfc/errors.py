"""Exception hierarchy shared by the library and the CLI."""


class SFCError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SFCError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateInputError(DomainError):
    """Inputs are in range but make the requested quantity undefined."""


class ConfigurationError(SFCError, ValueError):
    """A curve/size/mode combination is not supported."""


class ConsistencyError(SFCError, RuntimeError):
    """A constructed map failed its own invariant checks (codec bug)."""
