"""Epoch schedules: growing horizons with shrinking grid resolution.

A power schedule with exponent ``M`` starts epoch ``s`` at step ``s**M`` and
targets resolution ``delta_s = s**(-M/4)``.  Epoch 1 therefore spans steps
``1 .. 2**M - 1`` on the coarsest grid, and each later epoch replays the whole
history on a finer grid.  Working grids need an integer number of intervals,
so the realized grid size is ``s**(M/4)`` rounded up (exact powers are kept
exact).

``validate_schedule`` checks the three growth conditions a schedule must meet
for the calibration error to vanish epoch over epoch, using the ideal
real-valued sequences (not the integer-rounded working grids):

* shrink  -- resolutions must not fall too fast:
             ``delta_s <= delta_{s-1} * (1 - 1/(s+1))``.
* balance -- each epoch must start at or past the point where the resolution
             term and the cell-deviation term of the error balance:
             ``n_s >= ((k+1)/2)**2 * delta_s**-(k+3)``.
* tail    -- epoch starts must outrun the deviation scale needed for the
             per-epoch confidence terms to be summable:
             ``n_s >= (ln s + 2 ln ln s - 2 ln delta_s) / (2 delta_s**2)``.

Checks run for epochs ``2 .. max_epoch``; the first epoch has resolution 1 and
the conditions constrain growth between epochs.  The power schedule satisfies
all three for ``M = 8, k = 1`` (balance holds with equality); ``M = 1``
violates the shrink condition at every epoch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, DomainError
from .grid import PartitionGrid

__all__ = ["EpochSchedule", "ScheduleViolation", "validate_schedule"]

# Integer-rounding snap for grid sizes: s**(M/4) this close to an integer is
# treated as exact.
_SNAP = 1e-9


@dataclass(frozen=True)
class EpochSchedule:
    """Power schedule ``n_s = s**M``, ``delta_s = s**(-M/4)``."""

    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or isinstance(self.exponent, bool):
            raise ConfigError(f"epoch exponent must be an int, got {self.exponent!r}")
        if self.exponent < 1:
            raise ConfigError(f"epoch exponent must be >= 1, got {self.exponent}")

    def first_step(self, epoch: int) -> int:
        """First step of ``epoch`` (1-based): steps n with n_s <= n < n_{s+1}."""
        self._check_epoch(epoch)
        return epoch**self.exponent

    def resolution(self, epoch: int) -> float:
        """Ideal (real-valued) resolution ``s**(-M/4)``."""
        self._check_epoch(epoch)
        return float(epoch) ** (-self.exponent / 4.0)

    def grid_size(self, epoch: int) -> int:
        """Working grid intervals: ``s**(M/4)`` rounded up to an integer."""
        self._check_epoch(epoch)
        raw = float(epoch) ** (self.exponent / 4.0)
        near = round(raw)
        if abs(raw - near) < _SNAP:
            return max(1, int(near))
        return max(1, int(math.ceil(raw)))

    def grid(self, epoch: int) -> PartitionGrid:
        return PartitionGrid(self.grid_size(epoch))

    def epoch_of(self, step: int) -> int:
        """Epoch covering ``step`` (largest s with ``s**M <= step``)."""
        if step < 1:
            raise DomainError(f"step must be >= 1, got {step}")
        s = max(1, int(round(step ** (1.0 / self.exponent))))
        while s > 1 and s**self.exponent > step:
            s -= 1
        while (s + 1) ** self.exponent <= step:
            s += 1
        return s

    @staticmethod
    def _check_epoch(epoch: int) -> None:
        if epoch < 1:
            raise DomainError(f"epoch must be >= 1, got {epoch}")


@dataclass(frozen=True)
class ScheduleViolation:
    epoch: int
    check: str  # "shrink" | "balance" | "tail"
    detail: str


# Relative slack so exact-equality schedules are not flagged by rounding.
_REL_TOL = 1e-12


def validate_schedule(exponent: int, signal_dim: int, max_epoch: int) -> list[ScheduleViolation]:
    """Check the power schedule's growth conditions for epochs 2..max_epoch."""
    sched = EpochSchedule(exponent)
    if signal_dim < 0:
        raise ConfigError(f"signal dimension must be >= 0, got {signal_dim}")
    if max_epoch < 2:
        raise ConfigError(f"max epoch must be >= 2, got {max_epoch}")

    out: list[ScheduleViolation] = []
    k = signal_dim
    for s in range(2, max_epoch + 1):
        n_s = sched.first_step(s)
        d_s = sched.resolution(s)
        d_prev = sched.resolution(s - 1)

        limit = d_prev * (1.0 - 1.0 / (s + 1))
        if d_s > limit * (1.0 + _REL_TOL):
            out.append(
                ScheduleViolation(
                    s, "shrink", f"delta {d_s:.6g} exceeds allowed {limit:.6g}"
                )
            )

        need = ((k + 1) / 2.0) ** 2 * d_s ** -(k + 3)
        if n_s < need * (1.0 - _REL_TOL):
            out.append(
                ScheduleViolation(
                    s, "balance", f"start {n_s} below balance point {need:.6g}"
                )
            )

        need = (math.log(s) + 2.0 * math.log(math.log(s)) - 2.0 * math.log(d_s)) / (
            2.0 * d_s * d_s
        )
        if n_s < need * (1.0 - _REL_TOL):
            out.append(
                ScheduleViolation(
                    s, "tail", f"start {n_s} below deviation scale {need:.6g}"
                )
            )
    return out
