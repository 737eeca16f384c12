"""Command-line interface.

Four subcommands:

* ``backtest``          -- run the strategy over price files or a synthetic
                           market and write the report directory.
* ``calibrate``         -- forecast-only run; measures calibration error for
                           a set of checking rules against the bound curve.
* ``validate-schedule`` -- check an epoch schedule's growth conditions
                           (exit code 2 when violations are found).
* ``synth``             -- write a synthetic price CSV for later backtests.

Every flag mirrors a config-file key (flat ``key = value`` lines); flags
override file values.  Reports are byte-stable for a fixed configuration and
seed.
"""

from __future__ import annotations

import argparse
import sys

from .config import RunConfig, load_config, merge_overrides
from .data import SYNTH_KINDS, FlipAdversary, load_prices, rescale, synth_prices
from .engine import run_backtest, run_market, run_series
from .errors import GridcastError
from .report import fmt, write_backtest_report, write_run_report
from .rules import (
    above_rule,
    apply_rule,
    at_most_rule,
    calibration_error,
    full_interval_rule,
    threshold_rule,
)
from .schedule import validate_schedule

__all__ = ["main"]


def _add_config_flags(p: argparse.ArgumentParser, trading: bool) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--input", action="append", dest="inputs", metavar="CSV",
                   help="timestamp,price file; repeat for several assets")
    p.add_argument("--synth", help="synthetic market kind")
    p.add_argument("--n", type=int, dest="synth_n", help="steps for synthetic markets")
    p.add_argument("--seed", type=int, help="randomization seed")
    p.add_argument("--scale-lo", type=float, help="price mapped to 0")
    p.add_argument("--scale-hi", type=float, help="price mapped to 1")
    p.add_argument("--scale-clamp", action=argparse.BooleanOptionalAction, default=None,
                   help="pin out-of-bounds prices to the edge instead of failing")
    p.add_argument("--scale-auto", action=argparse.BooleanOptionalAction, default=None,
                   help="take bounds from the data (leaks the future; experiments only)")
    p.add_argument("--kernel", choices=("grid", "cosine"))
    p.add_argument("--signal", choices=("prev-price", "prev-price-direction"))
    p.add_argument("--grid-mode", choices=("fixed", "epochs"))
    p.add_argument("--grid-size", type=int, help="intervals of the fixed grid")
    p.add_argument("--epoch-exponent", type=int, help="power schedule exponent")
    p.add_argument("--epsilon", type=float, help="fixed entry threshold")
    p.add_argument("--confidence", type=float, help="confidence for bound curves")
    p.add_argument("--out", dest="out_dir", help="report directory")
    p.add_argument("--pure", action=argparse.BooleanOptionalAction, default=None,
                   dest="force_pure", help="use the pure-Python kernel")
    if trading:
        p.add_argument("--threshold-mode", choices=("fixed", "scaled-sigma"))
        p.add_argument("--epsilon-scale", type=float, help="deviation multiplier")
        p.add_argument("--epsilon-window", type=int, help="deviation window length")
        p.add_argument("--epsilon-floor", type=float, help="minimum threshold")
        p.add_argument("--holding", choices=("per-step", "sell-rule"))
        p.add_argument("--strategy", choices=("simple", "fractional"))
        p.add_argument("--risk-fraction", type=float, help="fraction reinvested per step")
        p.add_argument("--start-capital", type=float)
        p.add_argument("--cost-rate", type=float, help="per-side cost on notional")
        p.add_argument("--aggr-eta", type=float, help="mixture learning rate")
        p.add_argument("--aggr-period", type=int, help="steps per mixture period")
        p.add_argument("--synth-sigma", type=float)
        p.add_argument("--synth-start", type=float)
        p.add_argument("--synth-up", type=float)
        p.add_argument("--synth-down", type=float)
        p.add_argument("--synth-segment", type=int)
        p.add_argument("--synth-switch", choices=("length", "bounds"))
        p.add_argument("--synth-lo", type=float)
        p.add_argument("--synth-hi", type=float)


def _gather(args: argparse.Namespace, base: RunConfig) -> RunConfig:
    cfg = load_config(args.config) if args.config else base
    overrides = {}
    for name, value in vars(args).items():
        if name in ("config", "command", "func"):
            continue
        if value is None:
            continue
        if name == "inputs":
            value = tuple(value)
        overrides[name] = value
    return merge_overrides(cfg, overrides)


def _cmd_backtest(args) -> int:
    cfg = _gather(args, RunConfig())
    output = run_backtest(cfg)
    paths = write_backtest_report(cfg.out_dir, output)
    for asset in output.assets:
        r = asset.result
        print(
            f"{asset.label}: entries {len(r.gambles)} ({fmt(r.entry_frequency)}/step), "
            f"return {fmt(r.return_pct(False))}% "
            f"(net {fmt(r.return_pct(True))}%), "
            f"hold {fmt(asset.buyhold_pct)}%"
        )
    if output.aggr is not None:
        print(
            f"mixture: return {fmt(output.aggr.return_pct)}% "
            f"(net {fmt(output.aggr_net.return_pct)}%)"
        )
    print(f"report: {len(paths)} files in {cfg.out_dir}")
    return 0


_CALIBRATE_BASE = RunConfig(
    kernel="grid",
    grid_size=20,
    threshold_mode="fixed",
    epsilon=0.05,
    holding="per-step",
    cost_rate=0.0,
)


def _cmd_calibrate(args) -> int:
    cfg = _gather(args, _CALIBRATE_BASE)
    if cfg.synth == "flip-adversary":
        cfg.validate(need_market=False)
        result = run_market(cfg, adversary=FlipAdversary(), label="flip-adversary")
    elif cfg.synth:
        cfg.validate(need_market=True)
        outcomes = synth_prices(cfg.synth, cfg.synth_n, cfg.seed, **cfg.synth_params())
        result = run_market(cfg, outcomes=outcomes, label=cfg.synth)
    else:
        cfg.validate(need_market=True)
        series = load_prices(cfg.inputs[0])
        if cfg.scale_auto:
            lo, hi = float(series.raw.min()), float(series.raw.max())
        else:
            lo, hi = cfg.scale_lo, cfg.scale_hi
        series = rescale(series, lo, hi, clamp=cfg.scale_clamp)
        result = run_series(cfg, series, "input")

    eps = cfg.epsilon if cfg.threshold_mode == "fixed" else float(result.eps[-1])
    rules = [
        threshold_rule(eps),
        full_interval_rule(),
        above_rule(0.5),
        at_most_rule(0.5),
    ]
    rows = []
    outcomes_arr = result.outcomes[1:]
    for rule in rules:
        bits = apply_rule(rule, result.p_rnd, result.x_rnd)
        res = calibration_error(bits, result.p_rnd, outcomes_arr, "steps")
        rows.append((rule.label, res.value, res.selected_count))
        print(f"{rule.label}: error {fmt(res.value)} over {res.selected_count} selected")
    paths = write_run_report(cfg.out_dir, result, cfg.confidence, rows)
    print(f"report: {len(paths)} files in {cfg.out_dir}")
    return 0


def _cmd_validate_schedule(args) -> int:
    violations = validate_schedule(args.exponent, args.signal_dim, args.max_epoch)
    if not violations:
        print(
            f"schedule exponent {args.exponent} ok for signal dimension "
            f"{args.signal_dim} through epoch {args.max_epoch}"
        )
        return 0
    for v in violations:
        print(f"epoch {v.epoch}: {v.check}: {v.detail}")
    print(f"{len(violations)} violations")
    return 2


def _cmd_synth(args) -> int:
    params = {}
    for name in ("sigma", "start", "up", "down", "segment", "switch", "lo", "hi"):
        value = getattr(args, name)
        if value is not None:
            params[name] = value
    values = synth_prices(args.kind, args.n, args.seed, **params)
    # emit positive prices so the file round-trips through the loader:
    # price = 100 * (1 + S); recover S with scale bounds (100, 200)
    lines = ["timestamp,price"]
    for i, s in enumerate(values):
        lines.append(f"t{i:08d},{'%.12g' % (100.0 * (1.0 + s))}")
    with open(args.out, "w", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
    print(f"{args.out}: {len(values)} prices ({args.kind}, seed {args.seed})")
    print("rescale with --scale-lo 100 --scale-hi 200")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridcast",
        description="calibrated forecasting on grids, with a trading strategy",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("backtest", help="run the strategy and write a report")
    _add_config_flags(p, trading=True)
    p.set_defaults(func=_cmd_backtest)

    p = sub.add_parser("calibrate", help="forecast-only run with rule diagnostics")
    _add_config_flags(p, trading=False)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("validate-schedule", help="check epoch schedule growth conditions")
    p.add_argument("--exponent", type=int, required=True, help="power schedule exponent")
    p.add_argument("--signal-dim", type=int, default=1)
    p.add_argument("--max-epoch", type=int, default=10)
    p.set_defaults(func=_cmd_validate_schedule)

    p = sub.add_parser("synth", help="write a synthetic price CSV")
    p.add_argument("--kind", required=True, choices=SYNTH_KINDS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--sigma", type=float)
    p.add_argument("--start", type=float)
    p.add_argument("--up", type=float)
    p.add_argument("--down", type=float)
    p.add_argument("--segment", type=int)
    p.add_argument("--switch", choices=("length", "bounds"))
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GridcastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
