"""Accumulator backend selection: compiled core with pure-Python fallback.

The Cython extension is picked at import time when it is importable and the
environment variable ``GRIDCAST_PURE`` is unset.  Both backends execute the
same floating-point operations in the same order, so a run produces
bit-identical forecasts either way; the compiled path is just faster and
stores the cell table densely (hence the cell cap below, past which the
sparse pure table is used regardless).
"""

from __future__ import annotations

import importlib
import os

from ..errors import ConfigError
from .pure import GridAccumulator as PureGridAccumulator
from .pure import WaveAccumulator


def _load_compiled():
    if os.environ.get("GRIDCAST_PURE"):
        return None
    try:
        return importlib.import_module("._core", __name__)
    except ImportError:
        return None


_core = _load_compiled()

HAVE_COMPILED = _core is not None

# Dense tables above this many cells fall back to the sparse pure path.
DENSE_CELL_CAP = 4_000_000

__all__ = [
    "HAVE_COMPILED",
    "DENSE_CELL_CAP",
    "PureGridAccumulator",
    "WaveAccumulator",
    "backend_name",
    "make_accumulator",
]


def backend_name() -> str:
    return "compiled" if HAVE_COMPILED else "pure"


def make_accumulator(size: int, dim: int, kind: str = "grid", force_pure: bool = False):
    """Build the score/update backend for one forecaster state."""
    if kind == "cosine":
        return WaveAccumulator(size, dim)
    if kind != "grid":
        raise ConfigError(f"unknown kernel kind {kind!r}")
    if (
        HAVE_COMPILED
        and not force_pure
        and (size + 1) ** (dim + 1) <= DENSE_CELL_CAP
    ):
        return _core.GridAccumulator(size, dim)
    return PureGridAccumulator(size, dim)
