import os

from gridcast.config import RunConfig
from gridcast.data import synth_prices
from gridcast.engine import run_backtest, run_market
from gridcast.report import fmt, write_backtest_report, write_run_report

CFG = RunConfig(
    kernel="grid",
    grid_size=10,
    threshold_mode="fixed",
    epsilon=0.05,
    holding="per-step",
    strategy="simple",
    synth="random-walk",
    synth_n=200,
    synth_sigma=0.01,
    aggr_period=50,
    seed=9,
)


def test_fmt():
    assert fmt(None) == "na"
    assert fmt(0.1) == "0.1"
    assert fmt(1.0 / 3.0) == "0.333333333333"
    assert fmt(3) == "3"
    assert fmt("abc") == "abc"
    assert fmt(1e-300) == "1e-300"


def test_backtest_report_files(tmp_path):
    out = run_backtest(CFG)
    written = write_backtest_report(str(tmp_path), out)
    names = sorted(os.path.basename(p) for p in written)
    assert names == [
        "aggr.tsv",
        "calibration_random-walk.tsv",
        "config.txt",
        "summary.tsv",
        "trace_random-walk.tsv",
    ]
    for p in written:
        assert os.path.exists(p)

    summary = (tmp_path / "summary.tsv").read_text().splitlines()
    assert summary[0].split("\t") == [
        "asset", "entry_freq", "avg_duration", "return_pct",
        "return_net_pct", "buy_hold_pct",
    ]
    assert summary[1].split("\t")[0] == "random-walk"
    assert summary[-1].split("\t")[0] == "mixture"
    assert len(summary) == 3

    trace = (tmp_path / "trace_random-walk.tsv").read_text().splitlines()
    head = trace[0].split("\t")
    assert head[:4] == ["step", "prev", "outcome", "x1"]
    assert "forecast" in head and "forecast_rounded" in head
    assert len(trace) == CFG.synth_n + 1
    assert trace[1].split("\t")[0] == "1"
    # every row has the full column count
    assert {len(r.split("\t")) for r in trace} == {len(head)}

    calib = (tmp_path / "calibration_random-walk.tsv").read_text().splitlines()
    assert calib[0] == "step\terror\tbound"
    assert len(calib) == CFG.synth_n + 1

    aggr = (tmp_path / "aggr.tsv").read_text().splitlines()
    assert aggr[0].split("\t")[:5] == ["period", "from_step", "to_step", "value", "value_net"]
    assert aggr[0].split("\t")[5:] == ["w:cal:random-walk", "w:hold:random-walk"]
    assert len(aggr) == 1 + 200 // 50

    config = (tmp_path / "config.txt").read_text()
    assert "seed = 9" in config
    assert "kernel = grid" in config


def test_reports_are_byte_identical(tmp_path):
    d1 = tmp_path / "r1"
    d2 = tmp_path / "r2"
    write_backtest_report(str(d1), run_backtest(CFG))
    write_backtest_report(str(d2), run_backtest(CFG))
    files = sorted(os.listdir(d1))
    assert files == sorted(os.listdir(d2))
    for name in files:
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


def test_no_timestamps_or_environment(tmp_path):
    import re

    write_backtest_report(str(tmp_path), run_backtest(CFG))
    for name in os.listdir(tmp_path):
        text = (tmp_path / name).read_text()
        assert not re.search(r"\d{4}-\d{2}-\d{2}", text)  # no ISO dates
        assert os.getcwd() not in text


def test_run_report(tmp_path):
    outcomes = synth_prices("iid-uniform", 100, 4)
    res = run_market(CFG, outcomes, label="unit")
    written = write_run_report(str(tmp_path), res, 0.99,
                               rule_rows=[("always", 0.01, 100)])
    names = sorted(os.path.basename(p) for p in written)
    assert names == ["calibration_unit.tsv", "rules.tsv", "trace_unit.tsv"]
    rules = (tmp_path / "rules.tsv").read_text().splitlines()
    assert rules[0] == "rule\terror\tselected"
    assert rules[1] == "always\t0.01\t100"
