"""Shared exception types used across the package."""


class ShapeError(ValueError):
    """A substrate, policy, or genome has inconsistent dimensions."""


class ConfigError(ValueError):
    """A configuration value is missing, malformed, or inconsistent."""


class NumericError(ArithmeticError):
    """A computation produced non-finite values or a degenerate matrix."""


class EpisodeContractError(RuntimeError):
    """An environment was driven outside its step contract (e.g. step after done)."""
