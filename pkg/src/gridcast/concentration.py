"""Martingale concentration bounds and an empirical harness to stress them.

The forecaster's guarantees lean on one inequality: a sum of martingale
differences, each confined to a predictable band of width 1, deviates from
zero by more than ``n*t`` with probability at most ``2*exp(-2*n*t**2)``.  The
harness here lets any claimed martingale-difference stream be checked against
that bound by brute force: draw many trials, count tail exceedances, compare
against the bound plus binomial sampling noise.

The stream the package actually cares about is the selection residual

    V_i = rule(rounded point) * (outcome - rounded forecast)
          - E[ rule * (outcome - rounded forecast) | everything but the draws ]

whose conditional mean is zero by construction and whose support on any step
spans less than one unit.  ``selection_residuals`` extracts that stream from a
recorded run so it can be fed to the same harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .grid import ForecastPoint, PartitionGrid, joint_weights

__all__ = [
    "azuma_deviation",
    "azuma_tail",
    "maximal_tail",
    "MartingaleSpec",
    "EmpiricalTail",
    "empirical_tail",
    "fair_steps",
    "uniform_steps",
    "selection_residuals",
    "residual_support",
]


def azuma_deviation(n: int, confidence: float) -> float:
    """Deviation of a width-1 martingale sum not exceeded at ``confidence``.

    Inverts the two-sided tail bound: ``sqrt(n * ln(2/(1-confidence)) / 2)``.
    """
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if not 0.0 < confidence < 1.0:
        raise DomainError(f"confidence must be in (0, 1), got {confidence}")
    return math.sqrt(n * math.log(2.0 / (1.0 - confidence)) / 2.0)


def azuma_tail(n: int, t: float) -> float:
    """Bound on P(|S_n| > n*t) for width-1 martingale differences."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if t < 0.0:
        raise DomainError(f"t must be >= 0, got {t}")
    return min(1.0, 2.0 * math.exp(-2.0 * n * t * t))


def maximal_tail(n: int, t: float) -> float:
    """Bound on P(max_{m<=n} |S_m| > n*t) for width-1 differences."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if t < 0.0:
        raise DomainError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return 1.0
    return min(1.0, math.exp(-2.0 * n * t * t) / (t * t))


@dataclass(frozen=True)
class MartingaleSpec:
    """A claimed width-1 martingale-difference stream, drawable in bulk.

    ``make(rng, trials)`` returns a ``(trials, n)`` array of increments; each
    row is one independent realization.  ``width`` documents the claimed
    conditional support width (must be <= 1 for the bounds to apply).
    """

    label: str
    n: int
    make: Callable[[np.random.Generator, int], np.ndarray]
    width: float = 1.0


@dataclass(frozen=True)
class EmpiricalTail:
    threshold: float
    frequency: float
    bound: float
    stderr: float  # binomial sampling noise of the bound frequency
    trials: int
    maximal: bool


def empirical_tail(
    spec: MartingaleSpec,
    thresholds: Sequence[float],
    trials: int,
    seed: int,
    maximal: bool = False,
) -> list[EmpiricalTail]:
    """Measure tail frequencies of a stream against the matching bound.

    For each threshold ``t`` the frequency of ``|S_n| > n*t`` (or of the
    running maximum exceeding it, with ``maximal=True``) is recorded next to
    the bound and the binomial standard error ``sqrt(b*(1-b)/trials)`` at the
    bound value.
    """
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    increments = np.asarray(spec.make(rng, trials), dtype=float)
    if increments.shape != (trials, spec.n):
        raise ConfigError(
            f"stream {spec.label!r} produced shape {increments.shape}, "
            f"expected {(trials, spec.n)}"
        )
    if maximal:
        dev = np.abs(np.cumsum(increments, axis=1)).max(axis=1)
    else:
        dev = np.abs(increments.sum(axis=1))
    out = []
    for t in thresholds:
        bound = maximal_tail(spec.n, t) if maximal else azuma_tail(spec.n, t)
        freq = float(np.mean(dev > spec.n * t))
        stderr = math.sqrt(bound * (1.0 - bound) / trials)
        out.append(EmpiricalTail(t, freq, bound, stderr, trials, maximal))
    return out


def fair_steps(n: int, half: float = 0.5) -> MartingaleSpec:
    """Independent +-``half`` coin-flip increments (support width ``2*half``)."""
    if not 0.0 < half <= 0.5:
        raise ConfigError(f"half-step must be in (0, 0.5], got {half}")

    def make(rng: np.random.Generator, trials: int) -> np.ndarray:
        return (rng.integers(0, 2, size=(trials, n)) * 2 - 1) * half

    return MartingaleSpec(f"fair-steps-{half}", n, make, width=2 * half)


def uniform_steps(n: int) -> MartingaleSpec:
    """Independent uniform increments on [-1/2, 1/2]."""

    def make(rng: np.random.Generator, trials: int) -> np.ndarray:
        return rng.random(size=(trials, n)) - 0.5

    return MartingaleSpec("uniform-steps", n, make, width=1.0)


def _cell_point(cell: tuple[int, ...], size: int) -> tuple[float, tuple[float, ...]]:
    vals = [i / size for i in cell]
    return vals[0], tuple(vals[1:])


def selection_residuals(
    rule,
    grid: PartitionGrid,
    p_det: np.ndarray,
    x_det: np.ndarray,
    p_rnd: np.ndarray,
    x_rnd: np.ndarray,
    outcomes: np.ndarray,
) -> np.ndarray:
    """Harvest the selection-residual martingale differences from a run.

    Step ``i`` contributes the realized ``rule(p~, x~) * (S_i - p~)`` minus
    its exact conditional mean over the joint rounding cells of the
    deterministic point ``(p_i, x_i)``.
    """
    p_det = np.asarray(p_det, dtype=float)
    x_det = np.atleast_2d(np.asarray(x_det, dtype=float))
    p_rnd = np.asarray(p_rnd, dtype=float)
    x_rnd = np.atleast_2d(np.asarray(x_rnd, dtype=float))
    outcomes = np.asarray(outcomes, dtype=float)
    n = len(p_det)
    out = np.empty(n)
    for i in range(n):
        s_i = outcomes[i]
        actual = 0.0
        if rule(p_rnd[i], tuple(x_rnd[i])):
            actual = s_i - p_rnd[i]
        expected = 0.0
        q = ForecastPoint(p_det[i], tuple(x_det[i]))
        for cell, w in joint_weights(q, grid).items():
            vp, vx = _cell_point(cell, grid.size)
            if rule(vp, vx):
                expected += w * (s_i - vp)
        out[i] = actual - expected
    return out


def residual_support(
    rule, grid: PartitionGrid, p_det: float, x_det, outcome: float
) -> tuple[float, float]:
    """Range of values one selection residual can take, given the outcome.

    The spread never exceeds 1, which is what licenses the width-1 bounds on
    the harvested stream.
    """
    q = ForecastPoint(float(p_det), tuple(float(c) for c in x_det))
    cells = joint_weights(q, grid)
    expected = 0.0
    values = []
    for cell, w in cells.items():
        vp, vx = _cell_point(cell, grid.size)
        val = (outcome - vp) if rule(vp, vx) else 0.0
        expected += w * val
        values.append(val)
    lo = min(values) - expected
    hi = max(values) - expected
    return lo, hi
