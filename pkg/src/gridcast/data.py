"""Price series: loading, rescaling to [0, 1], synthetic markets.

File format: CSV with header ``timestamp,price``.  Timestamps are opaque
strings kept for provenance; they must be nondecreasing under string order
(ISO-style stamps sort correctly).  Prices must parse as finite positive
floats.

Rescaling maps raw prices affinely onto [0, 1] with user-supplied bounds.
Strict mode rejects prices outside the bounds; clamp mode pins them to the
edge.  Picking bounds from the data itself leaks the future into the map, so
auto-bounds exist only as an explicitly requested convenience.  The scaled
series gets one extra leading element duplicating the first value: the game's
starting level, so the first step's increment is zero and the first signal is
well defined.

Synthetic markets ship in three array flavors plus one reactive opponent:

* ``iid-uniform``     -- independent uniform outcomes.
* ``random-walk``     -- Gaussian steps folded back into [0, 1].
* ``drift-segments``  -- deterministic drift with optional noise, direction
  switching either on a fixed segment length or at band edges (sawtooth).
* ``flip-adversary``  -- reactive: answers each forecast with the opposite
  extreme outcome, the classic opponent that ruins any deterministic
  forecaster while randomized rounding shrugs it off.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DataError, DomainError

__all__ = [
    "PriceSeries",
    "load_prices",
    "rescale",
    "unscale",
    "fold_unit",
    "synth_prices",
    "FlipAdversary",
    "SYNTH_KINDS",
]


@dataclass(frozen=True)
class PriceSeries:
    timestamps: tuple[str, ...]
    raw: np.ndarray
    scaled: Optional[np.ndarray] = None  # length len(raw)+1, leading duplicate
    bounds: Optional[tuple[float, float]] = None

    @property
    def steps(self) -> int:
        """Number of game steps the series supports."""
        return len(self.raw)


def load_prices(path: str) -> PriceSeries:
    """Read and validate a ``timestamp,price`` CSV."""
    timestamps: list[str] = []
    prices: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if [c.strip().lower() for c in header] != ["timestamp", "price"]:
            raise DataError(f"{path}: line 1: header must be 'timestamp,price'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DataError(f"{path}: line {lineno}: expected 2 fields, got {len(row)}")
            stamp = row[0].strip()
            if not stamp:
                raise DataError(f"{path}: line {lineno}: empty timestamp")
            try:
                price = float(row[1])
            except ValueError:
                raise DataError(
                    f"{path}: line {lineno}: unparseable price {row[1]!r}"
                ) from None
            if math.isnan(price) or math.isinf(price) or price <= 0.0:
                raise DataError(
                    f"{path}: line {lineno}: price must be finite and positive, got {row[1]}"
                )
            if timestamps and stamp < timestamps[-1]:
                raise DataError(
                    f"{path}: line {lineno}: timestamp {stamp!r} decreases"
                )
            timestamps.append(stamp)
            prices.append(price)
    if len(prices) < 2:
        raise DataError(f"{path}: need at least 2 price rows, got {len(prices)}")
    return PriceSeries(tuple(timestamps), np.asarray(prices, dtype=float))


def rescale(series: PriceSeries, lo: float, hi: float, clamp: bool = False) -> PriceSeries:
    """Map raw prices onto [0, 1] and prepend the duplicated starting level."""
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise ConfigError(f"scale bounds must be finite with lo < hi, got ({lo}, {hi})")
    core = (series.raw - lo) / (hi - lo)
    if clamp:
        core = np.clip(core, 0.0, 1.0)
    else:
        bad = np.where((core < 0.0) | (core > 1.0))[0]
        if bad.size:
            i = int(bad[0])
            raise DataError(
                f"price {series.raw[i]} (row {i + 1}) falls outside scale bounds "
                f"({lo}, {hi}); widen them or pass clamp"
            )
    scaled = np.concatenate(([core[0]], core))
    return dataclasses.replace(series, scaled=scaled, bounds=(float(lo), float(hi)))


def unscale(values, bounds: tuple[float, float]) -> np.ndarray:
    """Inverse of the affine rescale map (no clamp undo)."""
    lo, hi = bounds
    return lo + np.asarray(values, dtype=float) * (hi - lo)


def fold_unit(values) -> np.ndarray:
    """Fold the real line into [0, 1] by reflection at both edges."""
    v = np.asarray(values, dtype=float) % 2.0
    return np.where(v > 1.0, 2.0 - v, v)


SYNTH_KINDS = ("iid-uniform", "random-walk", "drift-segments")


def synth_prices(kind: str, n: int, seed: int, **params) -> np.ndarray:
    """Generate a synthetic scaled series ``S_0 .. S_n`` (length n+1).

    ``S_0`` is the starting level the first signal sees.  Unknown parameter
    names raise; every kind ignores none of its parameters.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    if kind == "iid-uniform":
        _check_params(kind, params, ())
        return rng.random(n + 1)
    if kind == "random-walk":
        p = _check_params(kind, params, ("sigma", "start"))
        sigma = p.get("sigma", 0.01)
        start = p.get("start", 0.5)
        _check_unit_param(start, "start")
        if sigma <= 0.0:
            raise ConfigError(f"sigma must be positive, got {sigma}")
        steps = sigma * rng.standard_normal(n)
        free = start + np.concatenate(([0.0], np.cumsum(steps)))
        return fold_unit(free)
    if kind == "drift-segments":
        p = _check_params(
            kind,
            params,
            ("up", "down", "segment", "sigma", "start", "switch", "lo", "hi"),
        )
        return _drift_segments(rng, n, p)
    raise ConfigError(f"unknown synthetic kind {kind!r} (have {', '.join(SYNTH_KINDS)})")


def _check_params(kind: str, params: dict, allowed: tuple) -> dict:
    unknown = set(params) - set(allowed)
    if unknown:
        raise ConfigError(f"{kind}: unknown parameters {sorted(unknown)}")
    return params


def _check_unit_param(value: float, name: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must be in [0, 1], got {value}")


def _drift_segments(rng: np.random.Generator, n: int, p: dict) -> np.ndarray:
    up = p.get("up", 0.002)
    down = p.get("down", -0.002)
    segment = int(p.get("segment", 500))
    sigma = p.get("sigma", 0.0)
    start = p.get("start", 0.5)
    switch = p.get("switch", "length")
    lo = p.get("lo", 0.05)
    hi = p.get("hi", 0.95)
    _check_unit_param(start, "start")
    if up <= 0.0 or down >= 0.0:
        raise ConfigError("drift-segments needs up > 0 and down < 0")
    if sigma < 0.0:
        raise ConfigError(f"sigma must be >= 0, got {sigma}")
    if switch == "length":
        if segment < 1:
            raise ConfigError(f"segment length must be >= 1, got {segment}")
        idx = np.arange(n)
        drift = np.where((idx // segment) % 2 == 0, up, down)
        noise = sigma * rng.standard_normal(n) if sigma > 0.0 else np.zeros(n)
        free = start + np.concatenate(([0.0], np.cumsum(drift + noise)))
        return fold_unit(free)
    if switch == "bounds":
        if not 0.0 <= lo < hi <= 1.0:
            raise ConfigError(f"switch bounds must satisfy 0 <= lo < hi <= 1, got ({lo}, {hi})")
        out = np.empty(n + 1)
        out[0] = s = start
        rising = True
        noise = sigma * rng.standard_normal(n) if sigma > 0.0 else np.zeros(n)
        for i in range(n):
            s = s + (up if rising else down) + noise[i]
            if s > 1.0 or s < 0.0:
                s = s % 2.0
                if s > 1.0:
                    s = 2.0 - s
            if rising and s >= hi:
                rising = False
            elif not rising and s <= lo:
                rising = True
            out[i + 1] = s
        return out
    raise ConfigError(f"drift-segments: switch must be 'length' or 'bounds', got {switch!r}")


class FlipAdversary:
    """Reactive market that answers each forecast with the far outcome.

    Sees only the deterministic forecast of the step (never the rounded one)
    and replies 1 when the forecast is at most 1/2, else 0.  Every
    deterministic forecaster is thereby held at residuals of magnitude at
    least 1/2 forever; the randomized rounding makes the reply effectively
    uninformative about the rounded forecast.
    """

    start_level = 0.5  # initial "previous price" for the first signal

    def outcome(self, forecast: float) -> float:
        if not 0.0 <= forecast <= 1.0:
            raise DomainError(f"forecast {forecast!r} outside [0, 1]")
        return 1.0 if forecast <= 0.5 else 0.0
