import numpy as np
import pytest

from gridcast.config import RunConfig
from gridcast.data import FlipAdversary, synth_prices
from gridcast.engine import run_backtest, run_market
from gridcast.errors import ConfigError
from gridcast.trading import decompose_gains

BASE = RunConfig(
    kernel="grid",
    grid_size=20,
    threshold_mode="fixed",
    epsilon=0.05,
    holding="per-step",
    strategy="simple",
    cost_rate=0.0,
    seed=3,
)


def walk(n, seed=5, sigma=0.01):
    return synth_prices("random-walk", n, seed, sigma=sigma)


def test_run_market_shapes_and_ranges():
    outcomes = walk(400)
    res = run_market(BASE, outcomes, label="w")
    assert res.n == 400
    assert res.outcomes.shape == (401,)
    for arr in (res.p_det, res.p_rnd, res.eps, res.gains, res.capital,
                res.capital_net, res.costs):
        assert arr.shape == (400,)
    assert res.x_det.shape == (400, 1)
    assert np.all((res.p_rnd >= 0) & (res.p_rnd <= 1))
    # rounded values sit on the grid
    assert np.allclose(res.p_rnd * 20, np.round(res.p_rnd * 20))
    assert np.array_equal(np.unique(res.grid_sizes), [20])
    assert res.p_det[0] == 0.5  # pinned first forecast


def test_signals_are_previous_prices():
    outcomes = walk(50)
    res = run_market(BASE, outcomes, label="w")
    assert np.array_equal(res.x_det[:, 0], outcomes[:-1])
    cfg = RunConfig(**{**BASE.__dict__, "signal": "prev-price-direction"})
    res2 = run_market(cfg, outcomes, label="w")
    assert res2.x_det.shape == (50, 2)
    # direction bit: 1 when the previous step rose
    rose = (outcomes[1:-1] > outcomes[:-2]).astype(float)
    assert np.array_equal(res2.x_det[1:, 1], rose)


def test_capital_recursion_consistency():
    outcomes = walk(300)
    res = run_market(BASE, outcomes, label="w")
    ds = np.diff(res.outcomes)
    want = np.cumsum(res.in_market * ds)
    assert np.allclose(res.capital, want, atol=1e-12)
    assert np.allclose(res.gains, res.in_market * ds, atol=1e-12)
    # cost-free run: both paths coincide
    assert np.array_equal(res.capital, res.capital_net)


def test_costs_pull_net_below_gross():
    cfg = RunConfig(**{**BASE.__dict__, "cost_rate": 0.001})
    outcomes = walk(300)
    res = run_market(cfg, outcomes, label="w")
    if res.gambles:
        assert np.all(res.capital_net <= res.capital + 1e-15)
        assert res.costs.sum() > 0.0
        # two sides per closed gamble on a unit stake
        assert np.isclose(res.capital[-1] - res.capital_net[-1], res.costs.sum())


def test_gambles_well_formed_per_step():
    outcomes = walk(500, seed=11)
    res = run_market(BASE, outcomes, label="w")
    last_exit = 0
    for entry, exit_ in res.gambles:
        assert 1 <= entry <= exit_ <= res.n
        assert entry > last_exit
        last_exit = exit_
    # per-step mode: entered steps are exactly the selected ones
    assert np.array_equal(res.in_market, res.selected)
    assert res.entered == int(res.selected.sum())
    assert sum(res.durations) == res.entered


def test_gambles_well_formed_sell_rule():
    cfg = RunConfig(**{**BASE.__dict__, "holding": "sell-rule"})
    outcomes = walk(500, seed=11)
    res = run_market(cfg, outcomes, label="w")
    last_exit = 0
    for entry, exit_ in res.gambles:
        assert 1 <= entry <= exit_ <= res.n
        assert entry > last_exit
        last_exit = exit_
    # a held position is open from its entry step onward
    for entry, exit_ in res.gambles:
        assert res.in_market[entry - 1] == 1


def test_decomposition_identity_on_run():
    outcomes = walk(400, seed=13)
    res = run_market(BASE, outcomes, label="w")
    split = decompose_gains(res.selected, res.outcomes[1:], res.p_rnd,
                            res.x_rnd[:, 0], res.outcomes[:-1])
    assert abs(split.total - res.capital[-1]) < 1e-12


def test_flip_adversary_reactive_market():
    res = run_market(BASE, adversary=FlipAdversary(), label="flip")
    assert res.n == BASE.synth_n
    assert set(np.unique(res.outcomes[1:])) <= {0.0, 1.0}


def test_relative_value_modes():
    outcomes = walk(200)
    res = run_market(BASE, outcomes, label="w")
    rel = res.relative_value()
    assert rel[0] == 1.0 and len(rel) == res.n + 1
    assert np.allclose(rel[1:], 1.0 + res.capital)
    cfg = RunConfig(**{**BASE.__dict__, "strategy": "fractional", "start_capital": 2.0})
    res2 = run_market(cfg, outcomes, label="w")
    rel2 = res2.relative_value()
    assert rel2[0] == 1.0
    assert np.allclose(rel2[1:], res2.capital / 2.0)
    assert np.all(res2.capital > 0.0)  # limited risk never busts


def test_calibration_curve_within_bound_eventually():
    outcomes = walk(2000)
    res = run_market(BASE, outcomes, label="w")
    err, bound = res.calibration_curve()
    assert err.shape == bound.shape == (2000,)
    assert abs(err[-1]) <= bound[-1]


def test_epoch_mode_advances_grid():
    cfg = RunConfig(**{**BASE.__dict__, "grid_mode": "epochs", "epoch_exponent": 2})
    outcomes = walk(100)
    res = run_market(cfg, outcomes, label="w")
    sizes = res.grid_sizes
    # schedule with M=2: epochs start at 1, 4, 9, 16, ...; grid sizes ceil(s^(1/2))
    assert sizes[0] == 1
    assert sizes[3] == 2  # epoch 2
    assert sizes[-1] == res.state.grid.size
    assert len(np.unique(sizes)) > 1
    assert np.all(np.diff(sizes) >= 0)


def test_run_market_validates():
    with pytest.raises(ConfigError):
        run_market(BASE, outcomes=walk(10), adversary=FlipAdversary())
    with pytest.raises(ConfigError):
        run_market(BASE)
    with pytest.raises(ConfigError):
        run_market(BASE, outcomes=np.array([0.5, 1.5]))
    with pytest.raises(ConfigError):
        run_market(BASE, outcomes=np.array([0.5]))


def test_run_backtest_synth_two_like_assets():
    cfg = RunConfig(**{**BASE.__dict__, "synth": "random-walk", "synth_n": 600,
                       "synth_sigma": 0.01, "aggr_period": 200})
    out = run_backtest(cfg)
    assert len(out.assets) == 1
    assert out.aggr is not None
    # one calibrated path plus buy-and-hold per asset
    assert out.aggr.labels == ["cal:random-walk", "hold:random-walk"]
    assert out.aggr.weights.shape[1] == 2
    assert out.aggr.path[0] == 1.0
    assert out.config is cfg


def test_run_backtest_per_asset_seeds_differ(tmp_path):
    # two identical files still get different rounding streams; the price
    # fractions keep scaled values off the grid so rounding actually draws
    rows = ["timestamp,price"] + [
        f"t{i:04d},{100 + (i % 7) + 0.37:.2f}" for i in range(301)
    ]
    f1 = tmp_path / "a.csv"
    f2 = tmp_path / "b.csv"
    f1.write_text("\n".join(rows) + "\n")
    f2.write_text("\n".join(rows) + "\n")
    cfg = RunConfig(**{**BASE.__dict__, "inputs": (str(f1), str(f2)),
                       "scale_lo": 90.0, "scale_hi": 110.0, "aggr_period": 100})
    out = run_backtest(cfg)
    assert len(out.assets) == 2
    assert out.assets[0].result.seed != out.assets[1].result.seed
    assert not np.array_equal(out.assets[0].result.x_rnd, out.assets[1].result.x_rnd)
    assert out.assets[0].label != out.assets[1].label
    assert out.aggr.weights.shape[1] == 4
    assert np.allclose(out.aggr.weights.sum(axis=1), 1.0)


def test_run_backtest_rejects_unequal_lengths(tmp_path):
    rows_a = ["timestamp,price"] + [f"t{i:04d},100.0" for i in range(51)]
    rows_b = ["timestamp,price"] + [f"t{i:04d},100.0" for i in range(41)]
    f1 = tmp_path / "a.csv"
    f2 = tmp_path / "b.csv"
    f1.write_text("\n".join(rows_a) + "\n")
    f2.write_text("\n".join(rows_b) + "\n")
    cfg = RunConfig(**{**BASE.__dict__, "inputs": (str(f1), str(f2)),
                       "scale_lo": 90.0, "scale_hi": 110.0})
    with pytest.raises(ConfigError, match="same number of steps"):
        run_backtest(cfg)
