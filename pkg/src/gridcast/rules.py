"""Checking rules: ways of selecting steps whose forecasts are then audited.

A checking rule looks at the rounded forecast and rounded signal of a step
and decides whether the step counts.  Calibration error restricted to a rule
is the averaged signed residual over the steps it selects; a well-calibrated
forecaster drives this to zero for every rule simultaneously, which is what
makes the threshold rule usable as a trading entry test.

Rules receive grid-endpoint values, so a rule defined on endpoint sets is
exactly representable; composition by union of disjoint rules adds their
selected-residual sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "CheckingRule",
    "threshold_rule",
    "full_interval_rule",
    "band_rule",
    "above_rule",
    "at_most_rule",
    "union_rule",
    "apply_rule",
    "CalibrationResult",
    "calibration_error",
    "error_curve",
    "calibration_bound",
]


@dataclass(frozen=True)
class CheckingRule:
    label: str
    fn: Callable[[float, tuple], bool]

    def __call__(self, p: float, x=()) -> int:
        return 1 if self.fn(p, x) else 0


def threshold_rule(epsilon: float) -> CheckingRule:
    """Select steps whose forecast beats the previous price by ``epsilon``.

    The first signal coordinate is the (rounded) previous price; selection is
    strict: ``p > x[0] + epsilon``.
    """
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"threshold must be in (0, 1), got {epsilon}")

    def fn(p: float, x) -> bool:
        if len(x) < 1:
            raise DomainError("threshold rule needs the previous price as x[0]")
        return p > x[0] + epsilon

    return CheckingRule(f"above-prev+{epsilon:g}", fn)


def full_interval_rule() -> CheckingRule:
    """Select every step (plain unconditional calibration)."""
    return CheckingRule("all-steps", lambda p, x: True)


def band_rule(lo: float, hi: float) -> CheckingRule:
    """Select forecasts in ``[lo, hi)``; a band ending at 1 includes 1.

    Half-open bands tile [0, 1] exactly, so a family of adjacent bands
    partitions the steps.
    """
    if not (0.0 <= lo < hi <= 1.0):
        raise DomainError(f"band must satisfy 0 <= lo < hi <= 1, got [{lo}, {hi})")

    def fn(p: float, x) -> bool:
        return (lo <= p < hi) or (hi == 1.0 and p == 1.0)

    return CheckingRule(f"band-{lo:g}-{hi:g}", fn)


def above_rule(c: float) -> CheckingRule:
    """Select forecasts strictly above ``c``."""
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"cut must be in [0, 1], got {c}")
    return CheckingRule(f"above-{c:g}", lambda p, x: p > c)


def at_most_rule(c: float) -> CheckingRule:
    """Select forecasts at or below ``c``."""
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"cut must be in [0, 1], got {c}")
    return CheckingRule(f"at-most-{c:g}", lambda p, x: p <= c)


def union_rule(*rules: CheckingRule, label: str | None = None) -> CheckingRule:
    """Select steps selected by any of the given rules."""
    if not rules:
        raise ConfigError("union of zero rules")
    if label is None:
        label = "+".join(r.label for r in rules)
    return CheckingRule(label, lambda p, x: any(r.fn(p, x) for r in rules))


def apply_rule(rule: CheckingRule, forecasts, signals) -> np.ndarray:
    """Selection bits of a rule over recorded rounded forecasts and signals."""
    forecasts = np.asarray(forecasts, dtype=float)
    signals = np.atleast_2d(np.asarray(signals, dtype=float))
    if signals.size == 0:
        signals = np.zeros((len(forecasts), 0))
    out = np.zeros(len(forecasts), dtype=np.int8)
    for i in range(len(forecasts)):
        out[i] = 1 if rule.fn(forecasts[i], tuple(signals[i])) else 0
    return out


@dataclass(frozen=True)
class CalibrationResult:
    value: float
    selected_count: int
    steps: int
    normalization: str  # "steps" | "selections"

    @property
    def no_selections(self) -> bool:
        return self.selected_count == 0


def calibration_error(
    selected, forecasts, outcomes, normalization: str = "steps"
) -> CalibrationResult:
    """Signed average residual over the selected steps.

    ``steps`` divides by the run length, ``selections`` by the number of
    selected steps.  With nothing selected the value is 0 by convention and
    ``no_selections`` is set on the result.
    """
    if normalization not in ("steps", "selections"):
        raise ConfigError(f"unknown normalization {normalization!r}")
    selected = np.asarray(selected, dtype=float)
    forecasts = np.asarray(forecasts, dtype=float)
    outcomes = np.asarray(outcomes, dtype=float)
    n = len(selected)
    count = int(selected.sum())
    total = float(np.sum(selected * (outcomes - forecasts)))
    if normalization == "steps":
        value = total / n if n else 0.0
    else:
        value = total / count if count else 0.0
    return CalibrationResult(value, count, n, normalization)


def error_curve(selected, forecasts, outcomes) -> np.ndarray:
    """Running per-step calibration error after each step."""
    selected = np.asarray(selected, dtype=float)
    forecasts = np.asarray(forecasts, dtype=float)
    outcomes = np.asarray(outcomes, dtype=float)
    increments = selected * (outcomes - forecasts)
    return np.cumsum(increments) / np.arange(1, len(increments) + 1)


def calibration_bound(n, delta: float, signal_dim: int, confidence: float = 0.99):
    """Per-step calibration error bound at resolution ``delta``.

    Three parts: the rounding resolution itself, the martingale deviation of
    the randomization at the given confidence, and the cell-count deviation
    ``sqrt(1/(n * delta**(k+1)))``.  Accepts a scalar or an array of step
    counts.
    """
    if not 0.0 < delta <= 1.0:
        raise DomainError(f"resolution must be in (0, 1], got {delta}")
    if signal_dim < 0:
        raise DomainError(f"signal dimension must be >= 0, got {signal_dim}")
    if not 0.0 < confidence < 1.0:
        raise DomainError(f"confidence must be in (0, 1), got {confidence}")
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 1):
        raise DomainError("step counts must be >= 1")
    dev = np.sqrt(n_arr * np.log(2.0 / (1.0 - confidence)) / 2.0)
    bound = delta + dev / n_arr + np.sqrt(1.0 / (n_arr * delta ** (signal_dim + 1)))
    return bound if bound.shape else float(bound)
