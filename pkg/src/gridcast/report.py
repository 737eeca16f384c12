"""Report emission: plain TSV files, byte-stable across reruns.

A backtest writes into one directory:

* ``summary.tsv``            -- one row per asset plus the aggregated mixture:
                                entry frequency, average gamble duration,
                                return without and with transaction costs,
                                buy-and-hold return.
* ``trace_<asset>.tsv``      -- the full per-step record.
* ``calibration_<asset>.tsv``-- running threshold-rule error and its bound.
* ``aggr.tsv``               -- per-period mixture weights and value.
* ``config.txt``             -- the exact configuration, echoed field by field.

Numbers are printed with a fixed shortest-stable format and no timestamps or
environment details appear anywhere, so the same configuration and seed
produce byte-identical files on every run.  The buy-and-hold column is gross
(its two cost events are not modeled); the mixture row's with-cost value
aggregates the strategies' with-cost paths.
"""

from __future__ import annotations

import os
from typing import Optional

from .engine import BacktestOutput, RunResult

__all__ = ["fmt", "write_backtest_report", "write_run_report"]


def fmt(value) -> str:
    """Stable text form: shortest %.12g for floats, 'na' for missing."""
    if value is None:
        return "na"
    if isinstance(value, float):
        return "%.12g" % value
    return str(value)


def _write(path: str, lines: list[str]) -> str:
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
    return path


def _trace_lines(result: RunResult) -> list[str]:
    k = result.signal_dim
    head = ["step", "prev", "outcome"]
    head += [f"x{j+1}" for j in range(k)]
    head += [f"x{j+1}_rounded" for j in range(k)]
    head += [
        "forecast",
        "forecast_rounded",
        "threshold",
        "entry",
        "in_market",
        "gain",
        "capital",
        "capital_net",
        "cost",
        "grid",
    ]
    lines = ["\t".join(head)]
    for i in range(result.n):
        row = [
            str(i + 1),
            fmt(float(result.outcomes[i])),
            fmt(float(result.outcomes[i + 1])),
        ]
        row += [fmt(float(result.x_det[i, j])) for j in range(k)]
        row += [fmt(float(result.x_rnd[i, j])) for j in range(k)]
        row += [
            fmt(float(result.p_det[i])),
            fmt(float(result.p_rnd[i])),
            fmt(float(result.eps[i])),
            str(int(result.selected[i])),
            str(int(result.in_market[i])),
            fmt(float(result.gains[i])),
            fmt(float(result.capital[i])),
            fmt(float(result.capital_net[i])),
            fmt(float(result.costs[i])),
            str(int(result.grid_sizes[i])),
        ]
        lines.append("\t".join(row))
    return lines


def _calibration_lines(result: RunResult, confidence: float) -> list[str]:
    err, bound = result.calibration_curve(confidence)
    lines = ["step\terror\tbound"]
    for i in range(result.n):
        lines.append(f"{i+1}\t{fmt(float(err[i]))}\t{fmt(float(bound[i]))}")
    return lines


def _summary_lines(output: BacktestOutput) -> list[str]:
    head = [
        "asset",
        "entry_freq",
        "avg_duration",
        "return_pct",
        "return_net_pct",
        "buy_hold_pct",
    ]
    lines = ["\t".join(head)]
    for asset in output.assets:
        r = asset.result
        lines.append(
            "\t".join(
                [
                    asset.label,
                    fmt(r.entry_frequency),
                    fmt(r.average_duration),
                    fmt(r.return_pct(net=False)),
                    fmt(r.return_pct(net=True)),
                    fmt(asset.buyhold_pct),
                ]
            )
        )
    if output.aggr is not None:
        lines.append(
            "\t".join(
                [
                    "mixture",
                    "na",
                    "na",
                    fmt(output.aggr.return_pct),
                    fmt(output.aggr_net.return_pct if output.aggr_net else None),
                    "na",
                ]
            )
        )
    return lines


def _aggr_lines(output: BacktestOutput) -> list[str]:
    aggr = output.aggr
    head = ["period", "from_step", "to_step", "value", "value_net"]
    head += [f"w:{label}" for label in aggr.labels]
    lines = ["\t".join(head)]
    periods = len(aggr.edges) - 1
    for t in range(periods):
        row = [
            str(t + 1),
            str(int(aggr.edges[t])),
            str(int(aggr.edges[t + 1])),
            fmt(float(aggr.path[t + 1])),
            fmt(float(output.aggr_net.path[t + 1]) if output.aggr_net else None),
        ]
        row += [fmt(float(w)) for w in aggr.weights[t]]
        lines.append("\t".join(row))
    return lines


def write_backtest_report(out_dir: str, output: BacktestOutput) -> list[str]:
    """Write the full report; returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    cfg = output.config
    written = []
    written.append(_write(os.path.join(out_dir, "summary.tsv"), _summary_lines(output)))
    for asset in output.assets:
        written.append(
            _write(
                os.path.join(out_dir, f"trace_{asset.label}.tsv"),
                _trace_lines(asset.result),
            )
        )
        written.append(
            _write(
                os.path.join(out_dir, f"calibration_{asset.label}.tsv"),
                _calibration_lines(asset.result, cfg.confidence),
            )
        )
    if output.aggr is not None:
        written.append(_write(os.path.join(out_dir, "aggr.tsv"), _aggr_lines(output)))
    written.append(_write(os.path.join(out_dir, "config.txt"), cfg.to_lines()))
    return written


def write_run_report(
    out_dir: str,
    result: RunResult,
    confidence: float,
    rule_rows: Optional[list[tuple[str, float, int]]] = None,
) -> list[str]:
    """Forecast-only report: trace, calibration curve, optional rule table.

    ``rule_rows`` are ``(label, error, selected_count)`` triples measured
    post hoc over the run.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    written.append(
        _write(
            os.path.join(out_dir, f"trace_{result.label}.tsv"), _trace_lines(result)
        )
    )
    written.append(
        _write(
            os.path.join(out_dir, f"calibration_{result.label}.tsv"),
            _calibration_lines(result, confidence),
        )
    )
    if rule_rows is not None:
        lines = ["rule\terror\tselected"]
        for label, err, count in rule_rows:
            lines.append(f"{label}\t{fmt(err)}\t{count}")
        written.append(_write(os.path.join(out_dir, "rules.tsv"), lines))
    return written
