"""Figure rendering for the report paths.

Every command that writes a delimited report (training CSV, eval JSON,
ablation table) drops a PNG next to it. Rendering is headless (Agg) and
byte-deterministic for identical inputs.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def new_axes(width: float = 6.4):
    fig, ax = plt.subplots(figsize=(width, width * GOLDEN))
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_loss_curve(steps: list[int], losses: list[float], path: str | Path, title: str = "training loss") -> None:
    fig, ax = new_axes()
    ax.plot(steps, losses, lw=0.8, color="tab:blue", alpha=0.45, label="per step")
    if len(losses) >= 10:
        window = max(5, len(losses) // 30)
        smoothed = [
            sum(losses[max(0, i - window + 1) : i + 1]) / len(losses[max(0, i - window + 1) : i + 1])
            for i in range(len(losses))
        ]
        ax.plot(steps, smoothed, lw=1.8, color="tab:blue", label=f"moving mean ({window})")
        ax.legend(frameon=False)
    ax.set_xlabel("step")
    ax.set_ylabel("loss")
    ax.set_title(title)
    _save(fig, path)


def save_metric_bars(metrics: dict[str, float], path: str | Path, title: str = "evaluation") -> None:
    items = [(k, v) for k, v in metrics.items() if v is not None]
    fig, ax = new_axes()
    names = [k for k, _ in items]
    values = [v for _, v in items]
    ax.bar(range(len(items)), values, color="tab:blue", width=0.6)
    ax.set_xticks(range(len(items)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    for i, v in enumerate(values):
        ax.annotate(f"{v:.2f}", (i, v), ha="center", va="bottom", fontsize=8)
    ax.set_title(title)
    _save(fig, path)


def save_grouped_bars(
    groups: list[str],
    series: dict[str, list[float]],
    path: str | Path,
    title: str,
    ylabel: str,
) -> None:
    fig, ax = new_axes(7.2)
    count = len(series)
    width = 0.8 / max(count, 1)
    for i, (label, values) in enumerate(series.items()):
        xs = [g + i * width for g in range(len(groups))]
        ax.bar(xs, values, width=width, label=label)
    ax.set_xticks([g + 0.4 - width / 2 for g in range(len(groups))])
    ax.set_xticklabels(groups, fontsize=8)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    _save(fig, path)
