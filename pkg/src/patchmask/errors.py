"""Exception types, grouped by the CLI exit code they map to."""


class PatchmaskError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PatchmaskError):
    """Invalid configuration or parameter value (CLI exit code 2)."""


class DataError(PatchmaskError):
    """Malformed or inconsistent input data (CLI exit code 3)."""


class ConvergenceError(PatchmaskError):
    """A search failed to reach its target (CLI exit code 4)."""
