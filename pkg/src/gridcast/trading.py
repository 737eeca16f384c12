"""Trading on calibrated forecasts: entries, capital dynamics, guarantees.

The strategy buys one unit (or a fixed fraction of capital) whenever the
rounded forecast beats the rounded previous price by a threshold, and the
profit of each entered step is the price increment it captured.  Because the
entry test is itself a checking rule, calibration bounds the difference
between captured increments and the threshold margin, which is what the
capital lower bound expresses.

Protocol decisions pinned here (the engine and reports rely on them):

1. Entry is strict: ``p~ > prev~ + epsilon``, both sides rounded.  The exit
   test compares against the *unrounded* previous price (``p~ <= prev + eps``)
   or fires when the price fell over the step.
2. A gamble's duration counts from its entry step to the step on which the
   sell executes, inclusive; a gamble still open at the end of the data is
   closed at the final price and its duration runs to the last step.
3. Transaction costs are proportional to traded notional and charged per
   side: one application at the buy, one at the sell.  Cost-free and
   with-cost capital are tracked in parallel; every guarantee speaks about
   the cost-free path.
4. Simple mode holds one unit per entered step and starts from zero profit;
   fractional mode reinvests ``fraction`` of current capital and never hits
   zero for fractions below one, with worst case ``start*(1-fraction)^L``
   after ``L`` entered losing steps of maximal size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "entry_decision",
    "exit_decision",
    "sigma_threshold",
    "simple_step",
    "fractional_step",
    "transaction_cost",
    "worst_case_capital",
    "log_capital_bound",
    "capital_lower_bound",
    "realized_variance",
    "average_gain",
    "GainSplit",
    "decompose_gains",
    "run_lengths",
    "aggregate_strategies",
    "buy_and_hold",
]


def entry_decision(p_rounded: float, prev_rounded: float, epsilon: float) -> bool:
    """Strict threshold test on rounded values: enter when clearly above."""
    if epsilon <= 0.0:
        raise ConfigError(f"entry threshold must be positive, got {epsilon}")
    return p_rounded > prev_rounded + epsilon


def exit_decision(p_rounded: float, prev_price: float, epsilon: float) -> bool:
    """Start-of-step exit: the forecast no longer clears the held level."""
    if epsilon <= 0.0:
        raise ConfigError(f"exit threshold must be positive, got {epsilon}")
    return p_rounded <= prev_price + epsilon


def sigma_threshold(window: Sequence[float], scale: float, floor: float) -> float:
    """Adaptive threshold: ``scale`` times the sample deviation of a window.

    Computed over the trailing window of scaled prices with the unbiased
    (n-1) normalization; windows shorter than two fall back to ``floor``, as
    does any deviation small enough that the product drops below it.
    """
    if scale < 0.0:
        raise ConfigError(f"threshold scale must be >= 0, got {scale}")
    if floor <= 0.0:
        raise ConfigError(f"threshold floor must be positive, got {floor}")
    if len(window) < 2:
        return floor
    sigma = float(np.std(np.asarray(window, dtype=float), ddof=1))
    return max(scale * sigma, floor)


def simple_step(capital: float, in_market: bool, ds: float) -> tuple[float, float]:
    """One unit per entered step: ``(gain, new_capital)``."""
    gain = ds if in_market else 0.0
    return gain, capital + gain


def fractional_step(
    capital: float, in_market: bool, ds: float, fraction: float
) -> tuple[float, float]:
    """Reinvest ``fraction`` of capital on entered steps: multiplicative."""
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"risk fraction must be in (0, 1), got {fraction}")
    if not in_market:
        return 0.0, capital
    new = capital * (1.0 + fraction * ds)
    return new - capital, new


def transaction_cost(notional: float, rate: float) -> float:
    """Cost of one side (a buy or a sell) on the given traded notional."""
    if rate < 0.0:
        raise ConfigError(f"cost rate must be >= 0, got {rate}")
    if notional < 0.0:
        raise DomainError(f"notional must be >= 0, got {notional}")
    return notional * rate


def worst_case_capital(start: float, fraction: float, entered: int) -> float:
    """Fractional-mode floor: every entered step loses the full unit range.

    Computed by repeated multiplication, the same operation order the capital
    path uses, so the floor is exact rather than an ulp away from it.
    """
    if start <= 0.0:
        raise ConfigError(f"start capital must be positive, got {start}")
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"risk fraction must be in (0, 1), got {fraction}")
    if entered < 0:
        raise DomainError(f"entered count must be >= 0, got {entered}")
    out = start
    factor = 1.0 - fraction
    for _ in range(entered):
        out *= factor
    return out


def log_capital_bound(start: float, fraction: float, selected_ds) -> float:
    """Lower bound on log capital in fractional mode.

    Uses ``ln(1+y) >= y - y**2`` termwise on ``y = fraction * ds``, valid for
    ``y >= -1/2`` (guaranteed for fractions up to 1/2 on unit-range prices):

        ln K_n >= ln start + fraction * sum(I*ds) - fraction**2 * sum(I*ds**2)
    """
    if start <= 0.0:
        raise ConfigError(f"start capital must be positive, got {start}")
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"risk fraction must be in (0, 1), got {fraction}")
    ds = np.asarray(selected_ds, dtype=float)
    return float(
        math.log(start) + fraction * ds.sum() - fraction * fraction * (ds * ds).sum()
    )


def capital_lower_bound(
    start: float,
    fraction: float,
    entered: int,
    epsilon: float,
    variance: float,
    deviation_coeff: float,
    n: int,
    epoch_exponent: int,
) -> float:
    """Guaranteed fractional-mode capital from run statistics.

    ``entered`` steps at margin ``epsilon`` with realized per-entered-step
    variance ``variance``, degraded by the calibration deviation term
    ``deviation_coeff * n**(3/4 + 1/epoch_exponent)``:

        start * exp(fraction * (entered*(epsilon - fraction*variance)
                                - deviation_coeff * n**(3/4 + 1/M)))
    """
    if start <= 0.0:
        raise ConfigError(f"start capital must be positive, got {start}")
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"risk fraction must be in (0, 1), got {fraction}")
    if entered < 0 or n < 1:
        raise DomainError("entered must be >= 0 and n >= 1")
    if epoch_exponent < 1:
        raise ConfigError(f"epoch exponent must be >= 1, got {epoch_exponent}")
    drag = deviation_coeff * n ** (0.75 + 1.0 / epoch_exponent)
    return start * math.exp(fraction * (entered * (epsilon - fraction * variance) - drag))


def realized_variance(selected, ds) -> Optional[float]:
    """Mean squared increment over entered steps; None when none entered."""
    selected = np.asarray(selected, dtype=float)
    ds = np.asarray(ds, dtype=float)
    count = selected.sum()
    if count == 0:
        return None
    return float(np.sum(selected * ds * ds) / count)


def average_gain(selected, gains) -> Optional[float]:
    """Mean per-step gain over entered steps; None when none entered."""
    selected = np.asarray(selected, dtype=float)
    gains = np.asarray(gains, dtype=float)
    count = selected.sum()
    if count == 0:
        return None
    return float(np.sum(selected * gains) / count)


@dataclass(frozen=True)
class GainSplit:
    """Simple-mode gain split into its three exact parts.

    ``calibration`` is the residual the entry rule selects (outcome minus
    rounded forecast), ``rounding`` the drift between rounded and true
    previous price, ``margin`` the entry margin itself, at least epsilon per
    entered step.  The parts sum to the total gain identically.
    """

    calibration: float
    rounding: float
    margin: float

    @property
    def total(self) -> float:
        return self.calibration + self.rounding + self.margin


def decompose_gains(selected, outcomes, p_rounded, prev_rounded, prev) -> GainSplit:
    """Split simple-mode gains: outcome-vs-forecast + rounding + margin."""
    selected = np.asarray(selected, dtype=float)
    outcomes = np.asarray(outcomes, dtype=float)
    p_rounded = np.asarray(p_rounded, dtype=float)
    prev_rounded = np.asarray(prev_rounded, dtype=float)
    prev = np.asarray(prev, dtype=float)
    calibration = float(np.sum(selected * (outcomes - p_rounded)))
    rounding = float(np.sum(selected * (prev_rounded - prev)))
    margin = float(np.sum(selected * (p_rounded - prev_rounded)))
    return GainSplit(calibration, rounding, margin)


def run_lengths(bits) -> list[tuple[int, int]]:
    """Maximal runs of ones as ``(start_index, length)`` pairs."""
    out = []
    start = None
    bits = np.asarray(bits)
    for i, b in enumerate(bits):
        if b and start is None:
            start = i
        elif not b and start is not None:
            out.append((start, i - start))
            start = None
    if start is not None:
        out.append((start, len(bits) - start))
    return out


def aggregate_strategies(period_returns, eta: float) -> tuple[np.ndarray, np.ndarray]:
    """Exponential-weights mixture of strategies over coarse periods.

    ``period_returns`` has one row per strategy and one column per period.
    Weights start uniform; after each period ``t`` every weight is scaled by
    ``exp(eta * r)`` with its strategy's return that period, then
    renormalized.  Returns the weights used in each period (periods x
    strategies) and the mixture's value path (1 at period 0).
    """
    if eta < 0.0:
        raise ConfigError(f"learning rate must be >= 0, got {eta}")
    rets = np.atleast_2d(np.asarray(period_returns, dtype=float))
    n_strat, n_periods = rets.shape
    if n_strat < 1:
        raise ConfigError("need at least one strategy")
    w = np.full(n_strat, 1.0 / n_strat)
    weights = np.empty((n_periods, n_strat))
    path = np.empty(n_periods + 1)
    path[0] = 1.0
    for t in range(n_periods):
        weights[t] = w
        r = rets[:, t]
        path[t + 1] = path[t] * (1.0 + float(np.dot(w, r)))
        w = w * np.exp(eta * r)
        total = w.sum()
        if total <= 0.0 or not np.isfinite(total):
            raise DomainError("aggregation weights degenerated; check returns")
        w = w / total
    return weights, path


def buy_and_hold(prices) -> float:
    """Fractional return of holding from the first price to the last."""
    prices = np.asarray(prices, dtype=float)
    if len(prices) < 2:
        raise DomainError("buy-and-hold needs at least two prices")
    if prices[0] <= 0.0:
        raise DomainError("buy-and-hold needs a positive starting price")
    return float(prices[-1] / prices[0] - 1.0)
