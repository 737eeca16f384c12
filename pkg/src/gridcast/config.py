"""Run configuration: one flat dataclass, a flat key=value file format.

Every knob of a run lives here so a report can echo the exact configuration
back out and a reader can rerun it.  Files hold ``key = value`` lines
(``#`` comments and blank lines ignored); command-line flags override file
values field by field.

Scale bounds are deliberately explicit: rescaling price files needs
``scale_lo``/``scale_hi`` chosen by the user, because picking bounds from the
data itself leaks the whole future into the very first step.  ``scale_auto``
exists for quick experiments and says so in the echoed config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .errors import ConfigError

__all__ = ["RunConfig", "load_config", "merge_overrides"]

_KERNELS = ("grid", "cosine")
_SIGNALS = ("prev-price", "prev-price-direction")
_GRID_MODES = ("fixed", "epochs")
_THRESHOLD_MODES = ("fixed", "scaled-sigma")
_HOLDINGS = ("per-step", "sell-rule")
_STRATEGIES = ("simple", "fractional")


@dataclass(frozen=True)
class RunConfig:
    # market
    inputs: tuple[str, ...] = ()
    synth: str = ""  # synthetic kind; empty means file inputs
    synth_n: int = 10000
    synth_sigma: float = -1.0  # negative: use the generator default
    synth_start: float = -1.0
    synth_up: float = 0.0  # 0: generator default
    synth_down: float = 0.0
    synth_segment: int = 0
    synth_switch: str = ""
    synth_lo: float = -1.0
    synth_hi: float = -1.0
    seed: int = 1
    scale_lo: float = math.nan
    scale_hi: float = math.nan
    scale_clamp: bool = False
    scale_auto: bool = False

    # forecaster
    kernel: str = "cosine"
    signal: str = "prev-price"
    grid_mode: str = "fixed"
    grid_size: int = 100
    epoch_exponent: int = 8

    # threshold
    threshold_mode: str = "scaled-sigma"
    epsilon: float = 0.01
    epsilon_scale: float = 1.0
    epsilon_window: int = 60
    epsilon_floor: float = 1e-4

    # trading
    holding: str = "sell-rule"
    strategy: str = "simple"
    risk_fraction: float = 0.1
    start_capital: float = 1.0
    cost_rate: float = 0.0001

    # aggregation / reporting
    aggr_eta: float = 1.0
    aggr_period: int = 1440
    confidence: float = 0.99
    out_dir: str = "report"
    force_pure: bool = False

    @property
    def signal_dim(self) -> int:
        return 1 if self.signal == "prev-price" else 2

    def validate(self, need_market: bool = True) -> "RunConfig":
        if self.kernel not in _KERNELS:
            raise ConfigError(f"kernel must be one of {_KERNELS}, got {self.kernel!r}")
        if self.signal not in _SIGNALS:
            raise ConfigError(f"signal must be one of {_SIGNALS}, got {self.signal!r}")
        if self.grid_mode not in _GRID_MODES:
            raise ConfigError(f"grid_mode must be one of {_GRID_MODES}, got {self.grid_mode!r}")
        if self.threshold_mode not in _THRESHOLD_MODES:
            raise ConfigError(
                f"threshold_mode must be one of {_THRESHOLD_MODES}, got {self.threshold_mode!r}"
            )
        if self.holding not in _HOLDINGS:
            raise ConfigError(f"holding must be one of {_HOLDINGS}, got {self.holding!r}")
        if self.strategy not in _STRATEGIES:
            raise ConfigError(f"strategy must be one of {_STRATEGIES}, got {self.strategy!r}")
        if self.grid_size < 1:
            raise ConfigError(f"grid_size must be >= 1, got {self.grid_size}")
        if self.epoch_exponent < 1:
            raise ConfigError(f"epoch_exponent must be >= 1, got {self.epoch_exponent}")
        if self.kernel == "cosine" and self.grid_mode != "fixed":
            raise ConfigError("the cosine kernel runs on a fixed grid only")
        if self.threshold_mode == "fixed" and not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.epsilon_scale < 0.0:
            raise ConfigError(f"epsilon_scale must be >= 0, got {self.epsilon_scale}")
        if self.epsilon_window < 2:
            raise ConfigError(f"epsilon_window must be >= 2, got {self.epsilon_window}")
        if self.epsilon_floor <= 0.0:
            raise ConfigError(f"epsilon_floor must be positive, got {self.epsilon_floor}")
        if not 0.0 < self.risk_fraction < 1.0:
            raise ConfigError(f"risk_fraction must be in (0, 1), got {self.risk_fraction}")
        if self.start_capital <= 0.0:
            raise ConfigError(f"start_capital must be positive, got {self.start_capital}")
        if self.cost_rate < 0.0:
            raise ConfigError(f"cost_rate must be >= 0, got {self.cost_rate}")
        if self.aggr_eta < 0.0:
            raise ConfigError(f"aggr_eta must be >= 0, got {self.aggr_eta}")
        if self.aggr_period < 1:
            raise ConfigError(f"aggr_period must be >= 1, got {self.aggr_period}")
        if not 0.0 < self.confidence < 1.0:
            raise ConfigError(f"confidence must be in (0, 1), got {self.confidence}")
        if self.synth_n < 1:
            raise ConfigError(f"synth_n must be >= 1, got {self.synth_n}")
        if need_market:
            if bool(self.inputs) == bool(self.synth):
                raise ConfigError("give either price files or a synthetic kind, not both")
            if self.inputs and not self.scale_auto:
                if math.isnan(self.scale_lo) or math.isnan(self.scale_hi):
                    raise ConfigError(
                        "price files need scale_lo and scale_hi "
                        "(or scale_auto, which leaks the data range)"
                    )
        return self

    def synth_params(self) -> dict:
        """Generator parameters actually set by this configuration."""
        out: dict = {}
        if self.synth_sigma >= 0.0:
            out["sigma"] = self.synth_sigma
        if self.synth_start >= 0.0:
            out["start"] = self.synth_start
        if self.synth_up != 0.0:
            out["up"] = self.synth_up
        if self.synth_down != 0.0:
            out["down"] = self.synth_down
        if self.synth_segment > 0:
            out["segment"] = self.synth_segment
        if self.synth_switch:
            out["switch"] = self.synth_switch
        if self.synth_lo >= 0.0:
            out["lo"] = self.synth_lo
        if self.synth_hi >= 0.0:
            out["hi"] = self.synth_hi
        return out

    def to_lines(self) -> list[str]:
        """Echo every field as a sorted ``key = value`` line."""
        out = []
        for f in sorted(fields(self), key=lambda f: f.name):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(value)
            out.append(f"{f.name} = {value}")
        return out


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {raw!r}")


def _parse_value(name: str, raw: str, pytype: type):
    raw = raw.strip()
    try:
        if pytype is bool:
            return _parse_bool(raw)
        if pytype is int:
            return int(raw)
        if pytype is float:
            return float(raw)
        if pytype is tuple:
            return tuple(part.strip() for part in raw.split(",") if part.strip())
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


_FIELD_TYPES = {f.name: type(getattr(RunConfig(), f.name)) for f in fields(RunConfig)}


def load_config(path: str) -> RunConfig:
    """Parse a flat ``key = value`` config file."""
    values: dict = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
            name, raw = line.split("=", 1)
            name = name.strip()
            if name not in _FIELD_TYPES:
                raise ConfigError(f"{path}: line {lineno}: unknown key {name!r}")
            values[name] = _parse_value(name, raw, _FIELD_TYPES[name])
    return RunConfig(**values)


def merge_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    """Apply non-None override values on top of a config."""
    cleaned = {k: v for k, v in overrides.items() if v is not None}
    unknown = set(cleaned) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigError(f"unknown config fields {sorted(unknown)}")
    return replace(cfg, **cleaned) if cleaned else cfg
