"""Exception types shared across the package."""


class GraphError(ValueError):
    """Invalid graph input (out-of-range index, self-loop, ...)."""


class ConfigError(ValueError):
    """Parameters outside an operation's contract."""


class DegenerateFitError(ArithmeticError):
    """``P^L Y`` vanishes, so the least-squares weight is undefined."""


class WalkExplosionError(RuntimeError):
    """Estimated number of walks exceeds the enumeration cap."""
