"""Bar chart of evaluation scores."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from apimention.evaluate import AGGREGATE, MetricsReport  # noqa: E402


def plot_metrics(report: MetricsReport, path: str | Path) -> Path:
    """Detection and resolution P/R/F1 per thread plus the aggregate; format follows the suffix."""
    rows = list(report.threads) + [report.aggregate]
    labels = ["ALL" if r.thread_id == AGGREGATE else r.thread_id for r in rows]
    series = [
        ("detection F1", [r.detection.f1 for r in rows]),
        ("resolution P", [r.resolution.precision for r in rows]),
        ("resolution R", [r.resolution.recall for r in rows]),
        ("resolution F1", [r.resolution.f1 for r in rows]),
    ]
    width = 0.8 / len(series)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.9 * len(rows) + 2), 4.0))
    for k, (name, values) in enumerate(series):
        xs = [i + (k - (len(series) - 1) / 2) * width for i in range(len(rows))]
        ax.bar(xs, values, width=width, label=name)
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.legend(loc="lower right", fontsize="small")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, metadata={"Software": None} if path.suffix.lower() == ".png" else None)
    plt.close(fig)
    return path
