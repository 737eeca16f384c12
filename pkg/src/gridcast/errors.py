"""Exception vocabulary shared across the package.

Three failure families, kept deliberately small:

* ``DomainError``    -- a numeric argument is outside its mathematical domain
                        (probabilities or scaled prices outside [0, 1], NaN).
* ``ConfigError``    -- an inconsistent or unusable configuration value
                        (nonpositive grid size, threshold outside (0, 1), ...).
* ``DataError``      -- a price file that cannot be parsed or fails validation
                        (bad header, nonpositive price, decreasing timestamps).
"""

__all__ = ["GridcastError", "DomainError", "ConfigError", "DataError"]


class GridcastError(Exception):
    """Base class for all package-specific errors."""


class DomainError(GridcastError, ValueError):
    """A numeric value lies outside its mathematical domain."""


class ConfigError(GridcastError, ValueError):
    """A configuration value is inconsistent or unusable."""


class DataError(GridcastError, ValueError):
    """An input data file cannot be parsed or fails validation."""
