class DomainError(ValueError):
    """Argument outside the domain contract (time beyond horizon, bad level...)."""


class UnsupportedOperation(TypeError):
    """Operation not defined for this path kind."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""
