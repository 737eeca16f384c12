import math

import pytest

from gridcast.config import RunConfig, load_config, merge_overrides
from gridcast.errors import ConfigError


def test_defaults_validate_with_synth():
    cfg = RunConfig(synth="iid-uniform")
    cfg.validate()
    assert cfg.kernel == "cosine"
    assert cfg.signal_dim == 1
    assert RunConfig(signal="prev-price-direction").signal_dim == 2


def test_validate_market_requirements():
    with pytest.raises(ConfigError, match="either"):
        RunConfig().validate()
    with pytest.raises(ConfigError, match="either"):
        RunConfig(inputs=("a.csv",), synth="iid-uniform").validate()
    with pytest.raises(ConfigError, match="scale_lo"):
        RunConfig(inputs=("a.csv",)).validate()
    RunConfig(inputs=("a.csv",), scale_lo=10.0, scale_hi=20.0).validate()
    RunConfig(inputs=("a.csv",), scale_auto=True).validate()


def test_validate_option_values():
    with pytest.raises(ConfigError, match="kernel"):
        RunConfig(kernel="rbf", synth="iid-uniform").validate()
    with pytest.raises(ConfigError, match="cosine"):
        RunConfig(grid_mode="epochs", synth="iid-uniform").validate()
    RunConfig(kernel="grid", grid_mode="epochs", synth="iid-uniform").validate()
    with pytest.raises(ConfigError, match="epsilon"):
        RunConfig(threshold_mode="fixed", epsilon=0.0, synth="iid-uniform").validate()
    with pytest.raises(ConfigError, match="risk_fraction"):
        RunConfig(risk_fraction=1.0, synth="iid-uniform").validate()


def test_load_config_parses_types(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# comment line\n"
        "synth = random-walk\n"
        "synth_n = 500\n"
        "synth_sigma = 0.02\n"
        "seed = 9\n"
        "scale_clamp = true\n"
        "kernel = grid\n"
        "grid_size = 20\n"
        "\n"
        "inputs = a.csv, b.csv\n"
    )
    cfg = load_config(str(path))
    assert cfg.synth == "random-walk"
    assert cfg.synth_n == 500
    assert cfg.synth_sigma == 0.02
    assert cfg.seed == 9
    assert cfg.scale_clamp is True
    assert cfg.grid_size == 20
    assert cfg.inputs == ("a.csv", "b.csv")


def test_load_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("granularity = 5\n")
    with pytest.raises(ConfigError, match="granularity"):
        load_config(str(path))


def test_load_config_rejects_bad_bool(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("scale_clamp = maybe\n")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_merge_overrides():
    cfg = RunConfig(synth="iid-uniform")
    out = merge_overrides(cfg, {"seed": 5, "grid_size": 10, "synth_sigma": None})
    assert out.seed == 5 and out.grid_size == 10
    assert out.synth_sigma == cfg.synth_sigma  # None means "not given"
    with pytest.raises(ConfigError):
        merge_overrides(cfg, {"granularity": 5})


def test_to_lines_echo_is_sorted_and_complete():
    cfg = RunConfig(synth="iid-uniform", seed=3)
    lines = cfg.to_lines()
    keys = [ln.split(" = ")[0] for ln in lines]
    assert keys == sorted(keys)
    assert "seed = 3" in lines
    assert len(lines) == len(cfg.__dataclass_fields__)


def test_synth_params_only_set_fields():
    cfg = RunConfig(synth="drift-segments", synth_up=0.06, synth_down=-0.18,
                    synth_switch="bounds", synth_lo=0.05, synth_hi=0.95)
    params = cfg.synth_params()
    assert params == {"up": 0.06, "down": -0.18, "switch": "bounds",
                      "lo": 0.05, "hi": 0.95}
    assert RunConfig(synth="iid-uniform").synth_params() == {}
