"""Exception types shared across the package."""


class PrivitError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(PrivitError, ValueError):
    """Two paired objects (distribution/histogram) have different support sizes."""


class ConstructionError(PrivitError, ValueError):
    """A distribution construction was asked for parameters it cannot satisfy."""


class DivergenceUndefinedError(PrivitError, ValueError):
    """Chi-square divergence requested where the reference has a zero-mass symbol."""


class ConfigError(PrivitError, ValueError):
    """Invalid test or experiment configuration (CLI exit code 2)."""


class SearchExhaustedError(PrivitError, RuntimeError):
    """Sample-size search hit its cap without finding a passing m (CLI exit code 3)."""
