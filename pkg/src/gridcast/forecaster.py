"""Deterministic forecaster state and its four operations.

The forecaster answers each signal vector ``x`` with the probability ``p``
at which past residuals, smoothed over grid cells, change sign: candidates
below the root have seen outcomes above them on similar steps, candidates
above have seen the opposite.  Its state is the per-cell residual table plus
the raw history needed to rebuild that table on a finer grid when an epoch
schedule is in play.

Operations:

* ``solve_forecast``  -- leftmost root of the score (first step answers 1/2).
* ``score_function``  -- score of an arbitrary candidate, for diagnostics.
* ``update_state``    -- absorb the revealed outcome for the step just played.
* ``advance_epoch``   -- rebuild the state on a new grid by replaying the
  stored history from scratch; the replayed forecasts fill the table but are
  never emitted to the caller.

All four take and return plain values; only ``update_state`` mutates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import _kernels
from .errors import ConfigError, DomainError
from .grid import PartitionGrid

__all__ = [
    "ForecasterState",
    "new_state",
    "solve_forecast",
    "score_function",
    "update_state",
    "advance_epoch",
    "forecast_energy",
]


@dataclass
class ForecasterState:
    grid: PartitionGrid
    signal_dim: int
    kind: str = "grid"  # "grid" | "cosine"
    epoch: int = 1
    step: int = 0  # completed updates
    history: list = field(default_factory=list)  # [(x, outcome)]
    forecasts: list = field(default_factory=list)  # deterministic p, one per update
    force_pure: bool = False
    table: object = field(default=None, repr=False)

    @property
    def cell_sums(self) -> dict[tuple[int, ...], float]:
        """Nonzero accumulator cells as ``{endpoint-index tuple: sum}``."""
        return dict(self.table.cell_items())

    @property
    def wave_sums(self) -> tuple[float, float]:
        """Cosine-mode running sums ``(a, b)``; zeros under the grid kernel."""
        if self.kind == "cosine":
            return (self.table.a, self.table.b)
        return (0.0, 0.0)


def new_state(
    signal_dim: int,
    grid: PartitionGrid,
    kind: str = "grid",
    force_pure: bool = False,
) -> ForecasterState:
    if signal_dim < 0:
        raise ConfigError(f"signal dimension must be >= 0, got {signal_dim}")
    if kind not in ("grid", "cosine"):
        raise ConfigError(f"unknown kernel kind {kind!r}")
    table = _kernels.make_accumulator(grid.size, signal_dim, kind, force_pure)
    return ForecasterState(
        grid=grid, signal_dim=signal_dim, kind=kind, force_pure=force_pure, table=table
    )


def _check_signal(state: ForecasterState, x) -> tuple[float, ...]:
    x = tuple(float(c) for c in x)
    if len(x) != state.signal_dim:
        raise DomainError(
            f"signal has {len(x)} coordinates, state expects {state.signal_dim}"
        )
    for c in x:
        if not 0.0 <= c <= 1.0:
            raise DomainError(f"signal coordinate {c!r} outside [0, 1]")
    return x


def _check_unit(value: float, what: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{what} {value!r} outside [0, 1]")
    return value


def solve_forecast(x, state: ForecasterState) -> float:
    """Deterministic forecast for signal ``x``: the leftmost score root.

    Before any update has been absorbed the score is identically zero and the
    forecast is pinned at 1/2.
    """
    x = _check_signal(state, x)
    if state.step == 0:
        return 0.5
    return state.table.solve(x)


def score_function(p: float, x, state: ForecasterState) -> float:
    """Score a candidate forecast ``p`` against the accumulated residuals."""
    p = _check_unit(p, "candidate")
    x = _check_signal(state, x)
    return state.table.score(p, x)


def update_state(state: ForecasterState, p: float, x, outcome: float) -> None:
    """Absorb one played step: the forecast issued, its signal, the outcome."""
    p = _check_unit(p, "forecast")
    x = _check_signal(state, x)
    outcome = _check_unit(outcome, "outcome")
    state.table.update(p, x, outcome)
    state.history.append((x, outcome))
    state.forecasts.append(p)
    state.step += 1
    return None


def advance_epoch(state: ForecasterState, to) -> ForecasterState:
    """Rebuild the state on a new grid by replaying the stored history.

    ``to`` is the new ``PartitionGrid``, or an epoch schedule exposing
    ``grid(epoch)`` from which the next epoch's grid is taken.  The replay
    re-solves every stored step on the new grid; those forecasts refill the
    accumulator but are internal to the rebuilt state.
    """
    if isinstance(to, PartitionGrid):
        new_grid = to
    else:
        new_grid = to.grid(state.epoch + 1)
    fresh = new_state(state.signal_dim, new_grid, state.kind, state.force_pure)
    for x, outcome in state.history:
        p = solve_forecast(x, fresh)
        update_state(fresh, p, x, outcome)
    fresh.epoch = state.epoch + 1
    return fresh


def forecast_energy(state: ForecasterState) -> float:
    """Sum of squared accumulator cells; grows at most linearly in steps."""
    return state.table.energy()
