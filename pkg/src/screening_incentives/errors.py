"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A model, policy, or run configuration violates its invariants."""


class InputError(ValueError):
    """A runtime argument is outside the domain an operation accepts."""
