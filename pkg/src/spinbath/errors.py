"""Exception types shared across the package."""


class SpinBathError(Exception):
    """Base class for all package-specific errors."""


class ContractError(SpinBathError, ValueError):
    """An argument violates a documented precondition or type invariant."""


class ResourceLimitError(SpinBathError, RuntimeError):
    """A requested computation would exceed the configured size cap."""


class TimelineError(SpinBathError, ValueError):
    """A pulse timeline is malformed (overlaps, ordering, cycle bounds)."""


class ConfigError(SpinBathError, ValueError):
    """A run configuration file is malformed or inconsistent."""
