"""Matplotlib figures written next to the CSV."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def figure_paths(out: str) -> dict[str, str]:
    root, _ = os.path.splitext(out)
    return {"summary": f"{root}_summary.png", "series": f"{root}_series.png"}


def plot_summary(report, path: str) -> None:
    metrics = report.metrics
    reps = list(range(len(metrics)))
    fig, (ax_tps, ax_abort) = plt.subplots(1, 2, figsize=(9, 3.4))
    for ax, attr, color, label in ((ax_tps, "tps", "tab:blue", "throughput (tx/s)"),
                                   (ax_abort, "abort_rate", "tab:red", "abort rate")):
        ax.bar(reps, [getattr(m, attr) for m in metrics], color=color)
        ax.axhline(report.mean(attr), color="black", linestyle="--", linewidth=1)
        ax.set_xticks(reps)
        ax.set_xlabel("repetition")
        ax.set_ylabel(label)
    ax_abort.set_ylim(0, 1)
    cfg = report.config
    fig.suptitle(f"{cfg.benchmark} / {cfg.protocol} / {cfg.policy_config.label} / {cfg.threads} workers")
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)


def plot_series(report, path: str) -> None:
    fig, axes = plt.subplots(3, 1, figsize=(8, 7), sharex=True)
    for rep, result in enumerate(report.results):
        t, tps, rate, entries = [], [], [], []
        prev_c = prev_a = 0
        prev_t = 0.0
        for s in result.samples:
            dc, da = s.commits - prev_c, s.aborts - prev_a
            dt = s.second - prev_t or 1.0
            t.append(s.second)
            tps.append(dc / dt)
            rate.append(da / (da + dc) if da + dc else 0.0)
            entries.append(s.state_entries)
            prev_c, prev_a, prev_t = s.commits, s.aborts, s.second
        label = f"rep {rep}"
        axes[0].plot(t, tps, label=label)
        axes[1].plot(t, rate, label=label)
        axes[2].plot(t, entries, label=label)
    axes[0].set_ylabel("throughput (tx/s)")
    axes[1].set_ylabel("abort rate")
    axes[2].set_ylabel("State entries")
    axes[2].set_xlabel("time (s)")
    skew = report.config.skew
    for boundary in skew.boundaries()[:-1]:
        for ax in axes:
            ax.axvline(boundary, color="grey", linestyle=":", linewidth=1)
    if len(report.results) > 1:
        axes[0].legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)


def write_figures(report, out: str) -> list[str]:
    paths = figure_paths(out)
    written = [paths["summary"]]
    plot_summary(report, paths["summary"])
    if any(r.samples for r in report.results):
        plot_series(report, paths["series"])
        written.append(paths["series"])
    return written
