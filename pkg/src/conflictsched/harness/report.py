"""CSV reporting."""

from __future__ import annotations

import csv
import os
from typing import IO

from .metrics import mean, rse

COLUMNS = (
    "rep", "benchmark", "policy", "protocol", "threads", "tps", "abort_rate", "mean_rt_us", "p99_rt_us",
    "write_aborts", "read_aborts", "stolen_fraction", "tps_rse", "abort_rate_rse",
)

SERIES_COLUMNS = ("rep", "second", "tps", "abort_rate", "state_entries", "history_entries")

_FLOAT = ("tps", "abort_rate", "mean_rt_us", "p99_rt_us", "stolen_fraction", "tps_rse", "abort_rate_rse")


def _fmt(row: dict) -> list[str]:
    out = []
    for col in COLUMNS:
        v = row[col]
        out.append(f"{v:.6f}" if col in _FLOAT and isinstance(v, float) else str(v))
    return out


def rows(report) -> list[dict]:
    cfg = report.config
    base = {"benchmark": cfg.benchmark, "policy": cfg.policy_config.label, "protocol": cfg.protocol,
            "threads": cfg.threads}
    out = []
    for rep, m in enumerate(report.metrics):
        out.append({**base, "rep": rep, "tps": m.tps, "abort_rate": m.abort_rate, "mean_rt_us": m.mean_rt_us,
                    "p99_rt_us": m.p99_rt_us, "write_aborts": m.write_aborts, "read_aborts": m.read_aborts,
                    "stolen_fraction": m.stolen_fraction, "tps_rse": "", "abort_rate_rse": ""})
    metrics = report.metrics
    agg = {**base, "rep": "mean"}
    for col in ("tps", "abort_rate", "mean_rt_us", "p99_rt_us", "stolen_fraction"):
        agg[col] = mean([getattr(m, col) for m in metrics])
    for col in ("write_aborts", "read_aborts"):
        agg[col] = f"{mean([getattr(m, col) for m in metrics]):.1f}"
    agg["tps_rse"] = rse([m.tps for m in metrics])
    agg["abort_rate_rse"] = rse([m.abort_rate for m in metrics])
    out.append(agg)
    return out


def write_rows(report, fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows(report):
        writer.writerow(_fmt(row))


def series_path(out: str) -> str:
    root, ext = os.path.splitext(out)
    return f"{root}_series{ext or '.csv'}"


def write_series(report, fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SERIES_COLUMNS)
    for rep, result in enumerate(report.results):
        prev_c = prev_a = 0
        prev_t = 0.0
        for s in result.samples:
            dc, da = s.commits - prev_c, s.aborts - prev_a
            dt = s.second - prev_t or 1.0
            writer.writerow([rep, f"{s.second:g}", f"{dc / dt:.3f}", f"{da / (da + dc) if da + dc else 0.0:.6f}",
                             s.state_entries, s.history_entries])
            prev_c, prev_a, prev_t = s.commits, s.aborts, s.second


def write_csv(report, out: str) -> None:
    directory = os.path.dirname(out)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(out, "w", newline="") as fh:
        write_rows(report, fh)
    if any(r.samples for r in report.results):
        with open(series_path(out), "w", newline="") as fh:
            write_series(report, fh)
