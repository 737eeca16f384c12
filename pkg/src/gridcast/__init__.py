"""Randomized calibrated forecasting on moving grids, with a trading layer.

The package plays a sequential game: observe a signal vector, publish a
probability, watch the outcome.  Forecasts are chosen so that, after random
rounding to a grid, they are calibrated against any way of checking them; a
simple threshold check then doubles as a trading entry rule whose gains are
bounded below in terms of the calibration error.

Import surface: the submodules are the API
(``grid``, ``forecaster``, ``schedule``, ``rules``, ``trading``,
``concentration``, ``data``, ``engine``, ``config``, ``report``, ``cli``).
"""

from ._kernels import backend_name
from .errors import ConfigError, DataError, DomainError, GridcastError

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "backend_name",
    "GridcastError",
    "DomainError",
    "ConfigError",
    "DataError",
]
