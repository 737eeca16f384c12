"""Uniform partition of [0, 1] and randomized rounding onto its endpoints.

The partition with resolution ``delta = 1/K`` has endpoints ``v_i = i/K`` for
``i = 0..K``.  A value ``p`` in [0, 1] falls between two adjacent endpoints and
is *rounded at random* to one of them, with weights chosen so the rounded value
is unbiased:

    weight(lower) = 1 - (p - lower)/delta       weight(upper) = 1 - (upper - p)/delta

Values already on an endpoint round to it with weight one.  Rounding a forecast
together with its signal vector coordinate-by-coordinate induces a product
distribution over cells of the (k+1)-dimensional grid; two rounded points talk
to each other through the overlap kernel, the probability that both land in the
same cell.

Conventions pinned here and relied on everywhere else:

* Weights are computed from ``t = value * K`` via ``frac = t - floor(t)`` so
  that the pair sums to 1.0 exactly in floating point and the rounded mean
  reproduces ``value`` to within one or two ulps.
* Cells are addressed by integer endpoint indices (tuples), never by float
  endpoint values; the float endpoints are always materialized as ``i / K``.
* ``randomize_point`` consumes exactly ``1 + k`` uniform draws per call, one
  per coordinate in order (forecast first, then signal coordinates), even for
  coordinates that sit on an endpoint.  Fixing the consumption schedule makes
  every run reproducible from its seed regardless of where the points fall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError, DomainError

__all__ = [
    "PartitionGrid",
    "WeightPair",
    "ForecastPoint",
    "cell_parts",
    "rounding_weights",
    "joint_weights",
    "kernel_eval",
    "randomize_point",
]


@dataclass(frozen=True)
class PartitionGrid:
    """Uniform grid on [0, 1] with ``size`` intervals of width ``1/size``."""

    size: int

    def __post_init__(self):
        if not isinstance(self.size, int) or isinstance(self.size, bool):
            raise ConfigError(f"grid size must be an int, got {self.size!r}")
        if self.size < 1:
            raise ConfigError(f"grid size must be >= 1, got {self.size}")

    @property
    def delta(self) -> float:
        return 1.0 / self.size

    @property
    def node_count(self) -> int:
        return self.size + 1

    def endpoint(self, i: int) -> float:
        return i / self.size

    @property
    def endpoints(self) -> tuple[float, ...]:
        return tuple(i / self.size for i in range(self.size + 1))


def cell_parts(value: float, size: int) -> tuple[int, int, float]:
    """Locate ``value`` on the grid: ``(lower_index, upper_index, upper_weight)``.

    Degenerate placement (value exactly on an endpoint) returns equal indices
    and upper weight 0.0.  The lower weight is always ``1.0 - upper_weight``.
    This is the single source of truth for the rounding arithmetic; the
    compiled kernel mirrors these exact expressions so both paths produce
    bit-identical weights.
    """
    t = value * size
    i = int(t)
    if i >= size:
        return size, size, 0.0
    frac = t - i
    if frac == 0.0:
        return i, i, 0.0
    return i, i + 1, frac


@dataclass(frozen=True)
class WeightPair:
    """Randomized-rounding distribution of one value over two grid endpoints."""

    lower_index: int
    upper_index: int
    lower: float  # endpoint value i/K
    upper: float
    lower_weight: float
    upper_weight: float

    def support(self) -> tuple[tuple[int, float, float], ...]:
        """Nonzero-weight entries as ``(index, endpoint, weight)`` tuples."""
        if self.upper_weight == 0.0:
            return ((self.lower_index, self.lower, self.lower_weight),)
        return (
            (self.lower_index, self.lower, self.lower_weight),
            (self.upper_index, self.upper, self.upper_weight),
        )

    def as_dict(self) -> dict[float, float]:
        return {endpoint: w for _, endpoint, w in self.support()}

    @property
    def mean(self) -> float:
        return self.lower_weight * self.lower + self.upper_weight * self.upper

    @property
    def variance(self) -> float:
        spread = self.upper - self.lower
        return self.lower_weight * self.upper_weight * spread * spread


def _check_unit(value: float, what: str) -> float:
    value = float(value)
    if math.isnan(value) or not 0.0 <= value <= 1.0:
        raise DomainError(f"{what} must lie in [0, 1], got {value!r}")
    return value


def rounding_weights(value: float, grid: PartitionGrid) -> WeightPair:
    """Distribution of ``value`` over its two bracketing endpoints.

    The weights sum to 1.0 exactly and their mean reproduces ``value`` up to
    a couple of ulps.  Example: value 0.3 on the grid with delta 0.25 gives
    ``{0.25: 0.8, 0.5: 0.2}``; value 0.5 on the same grid gives ``{0.5: 1.0}``.
    """
    value = _check_unit(value, "value")
    lo, hi, frac = cell_parts(value, grid.size)
    return WeightPair(
        lower_index=lo,
        upper_index=hi,
        lower=lo / grid.size,
        upper=hi / grid.size,
        lower_weight=1.0 - frac,
        upper_weight=frac,
    )


@dataclass(frozen=True)
class ForecastPoint:
    """A forecast together with the signal vector it answered."""

    p: float
    x: tuple[float, ...] = field(default_factory=tuple)

    @property
    def coords(self) -> tuple[float, ...]:
        return (self.p, *self.x)


def joint_weights(q: ForecastPoint, grid: PartitionGrid) -> dict[tuple[int, ...], float]:
    """Product rounding distribution of a point over grid cells.

    Keys are tuples of endpoint indices, forecast coordinate first.  At most
    ``2**(k+1)`` cells carry weight and the weights sum to 1 (product of pairs
    each summing to 1 exactly; the full product is exact up to ~1e-15).
    """
    cells: list[tuple[tuple[int, ...], float]] = [((), 1.0)]
    for coord in q.coords:
        pair = rounding_weights(coord, grid)
        nxt: list[tuple[tuple[int, ...], float]] = []
        for prefix, w in cells:
            for idx, _, cw in pair.support():
                nxt.append((prefix + (idx,), w * cw))
        cells = nxt
    return dict(cells)


def kernel_eval(
    q1: ForecastPoint, q2: ForecastPoint, grid: PartitionGrid, mode: str = "grid"
) -> float:
    """Overlap of two points.

    ``grid`` mode: probability that independent randomized roundings of the
    two points land in the same cell, i.e. the dot product of their joint
    rounding distributions.  Nonzero only when the points are within one grid
    step in every coordinate.  ``cosine`` mode ignores the signals and returns
    ``cos(pi * (p1 - p2))``.
    """
    if mode == "cosine":
        return math.cos(math.pi * (q1.p - q2.p))
    if mode != "grid":
        raise ConfigError(f"unknown kernel mode {mode!r}")
    if len(q1.x) != len(q2.x):
        raise DomainError("points must have signal vectors of equal length")
    w1 = joint_weights(q1, grid)
    w2 = joint_weights(q2, grid)
    total = 0.0
    for cell, w in w1.items():
        other = w2.get(cell)
        if other is not None:
            total += w * other
    return total


def randomize_point(q: ForecastPoint, grid: PartitionGrid, rng) -> tuple[float, tuple[float, ...]]:
    """Round every coordinate of ``q`` to a grid endpoint at random.

    Consumes exactly ``1 + len(q.x)`` uniforms from ``rng`` in coordinate
    order; a coordinate rounds up when its uniform is below the upper weight.
    Returns ``(p_rounded, x_rounded)``.
    """
    out: list[float] = []
    for coord in q.coords:
        coord = _check_unit(coord, "coordinate")
        lo, hi, frac = cell_parts(coord, grid.size)
        u = rng.random()
        idx = hi if u < frac else lo
        out.append(idx / grid.size)
    return out[0], tuple(out[1:])
