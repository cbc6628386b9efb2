"""Shared exception types."""


class NumericalError(RuntimeError):
    """A linear-algebra routine failed (singular system, bad conditioning, ...)."""


class ConfigError(ValueError):
    """An experiment configuration is malformed or inconsistent."""
