"""Figures for benchmark tables."""

from __future__ import annotations

from typing import Iterable

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .bench import BenchRow  # noqa: E402


def plot_bench(rows: Iterable[BenchRow], path: str, title: str = "") -> str:
    """Bar charts of LP runs and total time per instance, one bar per strategy."""
    rows = list(rows)
    instances = list(dict.fromkeys(r.instance for r in rows))
    strategies = list(dict.fromkeys(r.strategy for r in rows))
    table = {(r.instance, r.strategy): r for r in rows}
    width = 0.8 / max(1, len(strategies))
    fig, (ax_runs, ax_time) = plt.subplots(1, 2, figsize=(11, 4))
    for k, strategy in enumerate(strategies):
        xs = [i + (k - (len(strategies) - 1) / 2) * width for i in range(len(instances))]
        picked = [table.get((name, strategy)) for name in instances]
        ax_runs.bar(xs, [r.lp_runs if r else 0 for r in picked], width, label=strategy)
        ax_time.bar(xs, [max(r.total_time_ms, 1e-3) if r else 0 for r in picked], width,
                    label=strategy)
    for ax, label in ((ax_runs, "LP runs"), (ax_time, "total time [ms]")):
        ax.set_xticks(range(len(instances)))
        ax.set_xticklabels(instances, rotation=45, ha="right")
        ax.set_ylabel(label)
        ax.legend()
    ax_time.set_yscale("log")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
