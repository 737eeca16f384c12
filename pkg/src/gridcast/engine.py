"""The sequential game loop tying forecaster, rounding, and trading together.

Order of operations within step ``i`` (prices already scaled to [0, 1]):

1. advance the epoch if the step counter reached the next epoch's start
   (replays the stored history on the finer grid),
2. build the signal from revealed prices (previous price, optionally the
   previous direction bit),
3. solve the deterministic forecast, then round forecast and signal on the
   current grid, consuming one uniform per coordinate,
4. evaluate the entry threshold and the holding logic (sells triggered by the
   forecast settle at the known previous price, before the outcome),
5. reveal the outcome -- a reactive market sees only the deterministic
   forecast, never the rounded one -- and settle the step's gain, plus a
   price-fall sell where the sell rule asks for one,
6. absorb the step into the forecaster state.

The full per-step record is kept so every diagnostic (calibration curves,
gain decomposition, residual harvest) can be recomputed from a result
without rerunning the game.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .config import RunConfig
from .data import SYNTH_KINDS, PriceSeries, load_prices, rescale, synth_prices
from .errors import ConfigError
from .forecaster import (
    ForecasterState,
    advance_epoch,
    new_state,
    solve_forecast,
    update_state,
)
from .grid import PartitionGrid, cell_parts
from .rules import calibration_bound, error_curve
from .schedule import EpochSchedule
from .trading import (
    aggregate_strategies,
    buy_and_hold,
    entry_decision,
    exit_decision,
    fractional_step,
    sigma_threshold,
    simple_step,
    transaction_cost,
)

__all__ = [
    "RunResult",
    "AssetRun",
    "AggrResult",
    "BacktestOutput",
    "run_market",
    "run_series",
    "run_backtest",
]


@dataclass
class RunResult:
    """Everything one game run produced, step-indexed arrays of length n."""

    label: str
    n: int
    seed: int
    kernel: str
    signal_dim: int
    holding: str
    strategy: str
    start_capital: float
    outcomes: np.ndarray  # S_0..S_n, length n+1
    p_det: np.ndarray
    p_rnd: np.ndarray
    x_det: np.ndarray  # (n, k)
    x_rnd: np.ndarray
    eps: np.ndarray
    selected: np.ndarray  # entry condition bit per step
    in_market: np.ndarray  # position captured this step's increment
    gains: np.ndarray  # cost-free per-step capital increments
    capital: np.ndarray  # cost-free path after each step
    capital_net: np.ndarray  # with transaction costs
    costs: np.ndarray
    grid_sizes: np.ndarray  # rounding grid per step (epoch mode varies)
    gambles: list = field(default_factory=list)  # (entry_step, exit_step), 1-based
    state: Optional[ForecasterState] = None

    @property
    def entered(self) -> int:
        """Number of steps with an open position."""
        return int(self.in_market.sum())

    @property
    def durations(self) -> list[int]:
        return [exit_ - entry + 1 for entry, exit_ in self.gambles]

    @property
    def entry_frequency(self) -> float:
        return len(self.gambles) / self.n

    @property
    def average_duration(self) -> Optional[float]:
        if not self.gambles:
            return None
        return sum(self.durations) / len(self.gambles)

    def relative_value(self, net: bool = False) -> np.ndarray:
        """Capital as a relative wealth path of length n+1, starting at 1.

        Simple mode reports 1 plus the accumulated gain on a unit stake;
        fractional mode divides by the starting capital.
        """
        path = self.capital_net if net else self.capital
        if self.strategy == "simple":
            return np.concatenate(([1.0], 1.0 + path))
        return np.concatenate(([1.0], path / self.start_capital))

    def return_pct(self, net: bool = False) -> float:
        rel = self.relative_value(net)
        return 100.0 * (rel[-1] - 1.0)

    def calibration_curve(self, confidence: float = 0.99) -> tuple[np.ndarray, np.ndarray]:
        """Running threshold-rule error next to its resolution-aware bound.

        In epoch mode the bound is evaluated with each step's current
        resolution, a per-epoch diagnostic rather than a single-run bound.
        """
        err = error_curve(self.selected, self.p_rnd, self.outcomes[1:])
        steps = np.arange(1, self.n + 1)
        bound = np.empty(self.n)
        for size in np.unique(self.grid_sizes):
            mask = self.grid_sizes == size
            bound[mask] = calibration_bound(
                steps[mask], 1.0 / size, self.signal_dim, confidence
            )
        return err, bound


def _round_coord(value: float, size: int, u: float) -> float:
    lo, hi, frac = cell_parts(value, size)
    return (hi if u < frac else lo) / size


def _stake(cfg: RunConfig, cap_net: float, price: float) -> float:
    """Traded notional at an entry or exit event."""
    if cfg.strategy == "simple":
        return price  # one unit bought or sold
    return cfg.risk_fraction * max(cap_net, 0.0)


def run_market(
    cfg: RunConfig,
    outcomes: Optional[np.ndarray] = None,
    adversary=None,
    label: str = "run",
) -> RunResult:
    """Play the game against a prepared outcome array or a reactive market."""
    cfg.validate(need_market=False)
    if (outcomes is None) == (adversary is None):
        raise ConfigError("pass exactly one of outcomes or adversary")

    if outcomes is not None:
        outcomes = np.asarray(outcomes, dtype=float)
        if outcomes.ndim != 1 or len(outcomes) < 2:
            raise ConfigError("outcomes must be a 1-d array S_0..S_n with n >= 1")
        if np.any(np.isnan(outcomes)) or np.any((outcomes < 0.0) | (outcomes > 1.0)):
            raise ConfigError("outcomes must lie in [0, 1]")
        n = len(outcomes) - 1
        start_level = float(outcomes[0])
    else:
        n = cfg.synth_n
        start_level = float(adversary.start_level)

    k = cfg.signal_dim
    sched = EpochSchedule(cfg.epoch_exponent) if cfg.grid_mode == "epochs" else None
    grid = sched.grid(1) if sched else PartitionGrid(cfg.grid_size)
    state = new_state(k, grid, kind=cfg.kernel, force_pure=cfg.force_pure)

    rng = np.random.default_rng(cfg.seed)
    draws = rng.random((n, k + 1))

    revealed = np.empty(n + 1)
    revealed[0] = start_level
    p_det = np.empty(n)
    p_rnd = np.empty(n)
    x_det = np.empty((n, k))
    x_rnd = np.empty((n, k))
    eps_arr = np.empty(n)
    selected = np.zeros(n, dtype=np.int8)
    in_market = np.zeros(n, dtype=np.int8)
    gains = np.zeros(n)
    capital = np.empty(n)
    capital_net = np.empty(n)
    costs = np.zeros(n)
    grid_sizes = np.empty(n, dtype=np.int64)
    gambles: list[tuple[int, int]] = []

    cap = 0.0 if cfg.strategy == "simple" else cfg.start_capital
    cap_net = cap
    holding = False
    entry_step = 0
    prev = start_level
    prev2 = start_level

    for i in range(1, n + 1):
        if sched is not None:
            while i >= sched.first_step(state.epoch + 1):
                state = advance_epoch(state, sched)
        size = state.grid.size
        grid_sizes[i - 1] = size

        x = (prev,) if k == 1 else (prev, 1.0 if prev > prev2 else 0.0)
        p = solve_forecast(x, state)

        row = draws[i - 1]
        pr = _round_coord(p, size, row[0])
        xr = tuple(_round_coord(x[j], size, row[1 + j]) for j in range(k))

        if cfg.threshold_mode == "fixed":
            eps = cfg.epsilon
        else:
            lo_idx = max(0, i - cfg.epsilon_window)
            eps = sigma_threshold(revealed[lo_idx:i], cfg.epsilon_scale, cfg.epsilon_floor)

        sel = entry_decision(pr, xr[0], eps)

        p_det[i - 1] = p
        p_rnd[i - 1] = pr
        x_det[i - 1] = x
        x_rnd[i - 1] = xr
        eps_arr[i - 1] = eps
        selected[i - 1] = 1 if sel else 0

        just_closed = False
        if cfg.holding == "per-step":
            if sel and not holding:
                holding = True
                entry_step = i
                cost = transaction_cost(_stake(cfg, cap_net, prev), cfg.cost_rate)
                cap_net -= cost
                costs[i - 1] += cost
            elif not sel and holding:
                # the run of entered steps ended at i-1; sell at its close
                holding = False
                gambles.append((entry_step, i - 1))
                cost = transaction_cost(_stake(cfg, cap_net, prev), cfg.cost_rate)
                cap_net -= cost
                costs[i - 1] += cost
            open_now = sel
        else:  # sell-rule
            if holding and exit_decision(pr, prev, eps):
                holding = False
                just_closed = True
                gambles.append((entry_step, i))
                cost = transaction_cost(_stake(cfg, cap_net, prev), cfg.cost_rate)
                cap_net -= cost
                costs[i - 1] += cost
            if sel and not holding and not just_closed:
                holding = True
                entry_step = i
                cost = transaction_cost(_stake(cfg, cap_net, prev), cfg.cost_rate)
                cap_net -= cost
                costs[i - 1] += cost
            open_now = holding

        s_i = float(outcomes[i]) if outcomes is not None else float(adversary.outcome(p))
        ds = s_i - prev

        in_market[i - 1] = 1 if open_now else 0
        if cfg.strategy == "simple":
            gain, cap = simple_step(cap, open_now, ds)
            _, cap_net = simple_step(cap_net, open_now, ds)
        else:
            gain, cap = fractional_step(cap, open_now, ds, cfg.risk_fraction)
            _, cap_net = fractional_step(cap_net, open_now, ds, cfg.risk_fraction)
        gains[i - 1] = gain

        if cfg.holding == "sell-rule" and holding and s_i <= prev:
            holding = False
            gambles.append((entry_step, i))
            cost = transaction_cost(_stake(cfg, cap_net, s_i), cfg.cost_rate)
            cap_net -= cost
            costs[i - 1] += cost

        capital[i - 1] = cap
        capital_net[i - 1] = cap_net

        update_state(state, p, x, s_i)
        revealed[i] = s_i
        prev2, prev = prev, s_i

    if holding:
        # end of data: liquidate at the final price
        gambles.append((entry_step, n))
        cost = transaction_cost(_stake(cfg, cap_net, prev), cfg.cost_rate)
        cap_net -= cost
        costs[n - 1] += cost
        capital_net[n - 1] = cap_net

    return RunResult(
        label=label,
        n=n,
        seed=cfg.seed,
        kernel=cfg.kernel,
        signal_dim=k,
        holding=cfg.holding,
        strategy=cfg.strategy,
        start_capital=cfg.start_capital,
        outcomes=revealed,
        p_det=p_det,
        p_rnd=p_rnd,
        x_det=x_det,
        x_rnd=x_rnd,
        eps=eps_arr,
        selected=selected,
        in_market=in_market,
        gains=gains,
        capital=capital,
        capital_net=capital_net,
        costs=costs,
        grid_sizes=grid_sizes,
        gambles=gambles,
        state=state,
    )


def run_series(cfg: RunConfig, series: PriceSeries, label: str) -> RunResult:
    if series.scaled is None:
        raise ConfigError("series must be rescaled before running")
    return run_market(cfg, outcomes=series.scaled, label=label)


@dataclass
class AssetRun:
    label: str
    result: RunResult
    raw: Optional[np.ndarray]  # raw prices when loaded from a file
    buyhold_pct: Optional[float]


@dataclass
class AggrResult:
    labels: list  # strategy labels, cal:<asset> and hold:<asset>
    edges: np.ndarray  # step indices bounding the periods
    weights: np.ndarray  # (periods, strategies), weights used in each period
    path: np.ndarray  # mixture value at each edge, starts at 1

    @property
    def return_pct(self) -> float:
        return 100.0 * (self.path[-1] - 1.0)


@dataclass
class BacktestOutput:
    config: RunConfig
    assets: list
    aggr: Optional[AggrResult]  # on cost-free strategy paths
    aggr_net: Optional[AggrResult]  # on with-cost strategy paths


def _asset_label(path: str, taken: set) -> str:
    base = re.sub(r"[^A-Za-z0-9_-]+", "-", os.path.splitext(os.path.basename(path))[0])
    base = base.strip("-") or "asset"
    label = base
    suffix = 2
    while label in taken:
        label = f"{base}-{suffix}"
        suffix += 1
    taken.add(label)
    return label


def _hold_path(asset: AssetRun) -> Optional[np.ndarray]:
    """Buy-and-hold relative wealth aligned with game steps 0..n."""
    if asset.raw is not None:
        return np.concatenate(([1.0], asset.raw / asset.raw[0]))
    start = asset.result.outcomes[0]
    if start <= 0.0:
        return None
    return asset.result.outcomes / start


def _period_edges(n: int, period: int) -> np.ndarray:
    edges = list(range(0, n + 1, period))
    if edges[-1] != n:
        edges.append(n)
    if len(edges) < 2:
        edges = [0, n]
    return np.asarray(edges)


def _aggregate(assets: list, period: int, eta: float, net: bool) -> Optional[AggrResult]:
    n = assets[0].result.n
    if any(a.result.n != n for a in assets):
        raise ConfigError("aggregation mixes per-period returns, so all assets must cover the same number of steps")
    edges = _period_edges(n, period)
    labels = []
    paths = []
    for asset in assets:
        labels.append(f"cal:{asset.label}")
        paths.append(asset.result.relative_value(net=net))
        hold = _hold_path(asset)
        if hold is not None:
            labels.append(f"hold:{asset.label}")
            paths.append(hold)
    values = np.stack([p[edges] for p in paths])
    if np.any(values <= 0.0):
        raise ConfigError(
            "a strategy wealth path hit zero; aggregation needs positive wealth "
            "(consider the fractional strategy)"
        )
    returns = values[:, 1:] / values[:, :-1] - 1.0
    weights, path = aggregate_strategies(returns, eta)
    return AggrResult(labels, edges, weights, path)


def run_backtest(cfg: RunConfig) -> BacktestOutput:
    """Load or synthesize every asset, run each, aggregate the strategies.

    Asset ``j`` runs with seed ``seed + j`` so randomization streams differ
    across assets but the whole backtest stays reproducible.
    """
    cfg.validate(need_market=True)
    assets: list[AssetRun] = []
    if cfg.inputs:
        taken: set = set()
        for idx, path in enumerate(cfg.inputs):
            series = load_prices(path)
            if cfg.scale_auto:
                lo, hi = float(series.raw.min()), float(series.raw.max())
                if lo == hi:
                    raise ConfigError(f"{path}: constant prices cannot be auto-scaled")
            else:
                lo, hi = cfg.scale_lo, cfg.scale_hi
            series = rescale(series, lo, hi, clamp=cfg.scale_clamp)
            label = _asset_label(path, taken)
            result = run_series(replace(cfg, seed=cfg.seed + idx), series, label)
            bh = 100.0 * buy_and_hold(series.raw)
            assets.append(AssetRun(label, result, series.raw, bh))
    else:
        if cfg.synth not in SYNTH_KINDS:
            raise ConfigError(
                f"backtest needs a synthetic kind from {SYNTH_KINDS}, got {cfg.synth!r}"
            )
        outcomes = synth_prices(cfg.synth, cfg.synth_n, cfg.seed, **cfg.synth_params())
        result = run_market(cfg, outcomes=outcomes, label=cfg.synth)
        if outcomes[0] > 0.0:
            bh = 100.0 * buy_and_hold(outcomes)
        else:
            bh = None
        assets.append(AssetRun(cfg.synth, result, None, bh))

    aggr = _aggregate(assets, cfg.aggr_period, cfg.aggr_eta, net=False)
    aggr_net = _aggregate(assets, cfg.aggr_period, cfg.aggr_eta, net=True)
    return BacktestOutput(cfg, assets, aggr, aggr_net)
