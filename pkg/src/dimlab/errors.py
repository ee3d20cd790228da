"""Exception types. Each maps to one CLI exit code."""


class DimlabError(Exception):
    """Base class for all library errors."""


class InputError(DimlabError, ValueError):
    """Malformed arguments or data (dimension mismatch, too few rows, ...)."""


class CapacityError(DimlabError):
    """A configured size cap was exceeded (oracle size, word count)."""


class ContractError(DimlabError):
    """A documented precondition on the data does not hold (e.g. full support)."""


class ConfigurationError(DimlabError):
    """A requested computation cannot be set up (e.g. no usable witness scales)."""
