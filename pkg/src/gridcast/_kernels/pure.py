"""Pure-Python accumulator backends.

Two flavors back the forecaster:

* ``GridAccumulator`` -- per-cell sums over the (k+1)-dimensional grid.  The
  score of a candidate forecast is linear in the candidate's rounding weights,
  so it is piecewise linear on [0, 1] with breakpoints at the endpoints; the
  forecast is the leftmost root of that piecewise-linear function.
* ``WaveAccumulator`` -- a single-frequency trigonometric score with exact
  closed-form roots, used by the lightweight trading protocol.

Cells are stored sparsely (flat index -> accumulated sum); only cells a past
point has touched can carry weight, so the table stays small even on fine
grids.  The compiled twin in ``_core.pyx`` stores the same table densely.

The floating-point contract with the compiled twin: identical operation order.
Both paths

* derive rounding weights via ``frac = value*size - floor(value*size)`` and
  ``1.0 - frac``,
* enumerate the ``2**k`` signal-cell combinations with the last coordinate
  varying fastest, multiplying per-coordinate weights left to right,
* scale signal-cell weights by the forecast-coordinate weight as one final
  multiply (``w_p * w_signal``),
* accumulate node scores over combinations in that same enumeration order,
* interpolate roots as ``(i + g_i/(g_i - g_next)) / size``.

Any change here must be mirrored there, or bit-identical fallback behavior is
lost (the cross-backend test will catch it).
"""

from __future__ import annotations

import math

from ..errors import ConfigError, DomainError
from ..grid import cell_parts

__all__ = ["GridAccumulator", "WaveAccumulator"]


class GridAccumulator:
    """Sparse per-cell sums of rounding-weight times forecast residual."""

    kind = "grid"

    def __init__(self, size: int, dim: int):
        if size < 1:
            raise ConfigError(f"grid size must be >= 1, got {size}")
        if dim < 0:
            raise ConfigError(f"signal dimension must be >= 0, got {dim}")
        self.size = size
        self.dim = dim
        self.cells: dict[int, float] = {}
        nodes = size + 1
        # flat index = p_index * nodes**dim + sum_j x_index[j] * nodes**(dim-1-j)
        self._pstride = nodes**dim
        self._xstrides = [nodes ** (dim - 1 - j) for j in range(dim)]

    def _signal_cells(self, x) -> tuple[list[int], list[float]]:
        """Offsets and weights of the 2**dim signal-cell combinations."""
        if len(x) != self.dim:
            raise DomainError(f"expected {self.dim} signal coordinates, got {len(x)}")
        parts = [cell_parts(coord, self.size) for coord in x]
        combos = 1 << self.dim
        offs = [0] * combos
        wts = [1.0] * combos
        for b in range(combos):
            off = 0
            w = 1.0
            for j in range(self.dim):
                lo, hi, frac = parts[j]
                if (b >> (self.dim - 1 - j)) & 1:
                    off += hi * self._xstrides[j]
                    w *= frac
                else:
                    off += lo * self._xstrides[j]
                    w *= 1.0 - frac
            offs[b] = off
            wts[b] = w
        return offs, wts

    def node_scores(self, x) -> list[float]:
        """Score of each grid endpoint as a candidate forecast."""
        offs, wts = self._signal_cells(x)
        combos = len(offs)
        cells = self.cells
        pstride = self._pstride
        g = [0.0] * (self.size + 1)
        for i in range(self.size + 1):
            base = i * pstride
            acc = 0.0
            for b in range(combos):
                acc += wts[b] * cells.get(base + offs[b], 0.0)
            g[i] = acc
        return g

    def score(self, p: float, x) -> float:
        """Expected accumulated residual seen by a rounded candidate ``p``."""
        lo, hi, frac = cell_parts(p, self.size)
        offs, wts = self._signal_cells(x)
        combos = len(offs)
        cells = self.cells
        glo = 0.0
        ghi = 0.0
        base_lo = lo * self._pstride
        base_hi = hi * self._pstride
        for b in range(combos):
            glo += wts[b] * cells.get(base_lo + offs[b], 0.0)
        for b in range(combos):
            ghi += wts[b] * cells.get(base_hi + offs[b], 0.0)
        return (1.0 - frac) * glo + frac * ghi

    def solve(self, x) -> float:
        """Leftmost root of the piecewise-linear score, or the boundary rule.

        Scanning left to right: an endpoint with zero score wins; otherwise
        the first sign change is interpolated exactly.  A score that is
        strictly positive everywhere yields 1.0, strictly negative 0.0.
        """
        g = self.node_scores(x)
        size = self.size
        for i in range(size + 1):
            gi = g[i]
            if gi == 0.0:
                return i / size
            if i < size and gi * g[i + 1] < 0.0:
                t = gi / (gi - g[i + 1])
                return (i + t) / size
        return 1.0 if g[0] > 0.0 else 0.0

    def update(self, p: float, x, outcome: float) -> None:
        """Spread ``outcome - p`` over the joint rounding cells of ``(p, x)``."""
        r = outcome - p
        plo, phi, pfrac = cell_parts(p, self.size)
        offs, wts = self._signal_cells(x)
        combos = len(offs)
        cells = self.cells
        base = plo * self._pstride
        w_p = 1.0 - pfrac
        for b in range(combos):
            flat = base + offs[b]
            cells[flat] = cells.get(flat, 0.0) + (w_p * wts[b]) * r
        if pfrac != 0.0:
            base = phi * self._pstride
            for b in range(combos):
                flat = base + offs[b]
                cells[flat] = cells.get(flat, 0.0) + (pfrac * wts[b]) * r
        return None

    def energy(self) -> float:
        """Sum of squared cell sums (bounded by the number of updates)."""
        # ascending flat order, so the total matches the dense backend exactly
        return sum(v * v for _, v in sorted(self.cells.items()))

    def cell_items(self):
        """Yield ``(cell_index_tuple, value)`` for every nonzero cell."""
        for flat, v in self.cells.items():
            if v == 0.0:
                continue
            idx = [0] * (self.dim + 1)
            idx[0], rem = divmod(flat, self._pstride)
            for j in range(self.dim):
                idx[j + 1], rem = divmod(rem, self._xstrides[j])
            yield tuple(idx), v


class WaveAccumulator:
    """Two running sums defining the score ``a*cos(pi*p) + b*sin(pi*p)``."""

    kind = "cosine"

    def __init__(self, size: int, dim: int):
        if size < 1:
            raise ConfigError(f"grid size must be >= 1, got {size}")
        self.size = size
        self.dim = dim
        self.a = 0.0
        self.b = 0.0

    def score(self, p: float, x=()) -> float:
        return self.a * math.cos(math.pi * p) + self.b * math.sin(math.pi * p)

    def solve(self, x=()) -> float:
        """Smallest root in [0, 1] of the wave score; 0.5 when it is flat.

        The score is R*cos(pi*p - phase), whose roots sit at
        ``phase/pi + 1/2 (mod 1)``; exactly one or two of the shifted
        candidates land in [0, 1] and the smallest is returned.
        """
        if self.a == 0.0 and self.b == 0.0:
            return 0.5
        c = math.atan2(self.b, self.a) / math.pi + 0.5
        best = None
        for m in (-1.0, 0.0, 1.0):
            cand = c + m
            if 0.0 <= cand <= 1.0 and (best is None or cand < best):
                best = cand
        return best

    def update(self, p: float, x, outcome: float) -> None:
        r = outcome - p
        self.a += r * math.cos(math.pi * p)
        self.b += r * math.sin(math.pi * p)
        return None

    def energy(self) -> float:
        return self.a * self.a + self.b * self.b

    def cell_items(self):
        return iter(())
