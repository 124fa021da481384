"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A scenario document is malformed or violates a field constraint."""


class NumericalError(RuntimeError):
    """A numerical routine failed (non-PSD matrix, no convergence, degenerate data)."""
