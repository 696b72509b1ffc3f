"""Matplotlib renderings saved next to the delimited report output."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def save_state_accuracy_heatmap(acc: np.ndarray, counts: np.ndarray, path: str | Path):
    """Per-scoreline transition-model accuracy grid."""
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    masked = np.ma.masked_invalid(acc)
    im = ax.imshow(masked, vmin=0, vmax=1, cmap="viridis", origin="lower")
    for h in range(acc.shape[0]):
        for a in range(acc.shape[1]):
            if not math.isnan(acc[h, a]):
                ax.text(a, h, f"{acc[h, a]:.2f}\nn={int(counts[h, a])}",
                        ha="center", va="center", fontsize=7,
                        color="white" if acc[h, a] < 0.6 else "black")
    ax.set_xlabel("away goals")
    ax.set_ylabel("home goals")
    ax.set_title("Transition model accuracy by scoreline")
    fig.colorbar(im, ax=ax, label="accuracy")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_payoff_table_heatmap(
    payoffs: np.ndarray,
    row_labels: list[str],
    col_labels: list[str],
    path: str | Path,
    highlight: tuple[int, int] | None = None,
):
    """Expected weighted payoff per (our action, opponent action)."""
    fig, ax = plt.subplots(figsize=(max(4.0, 0.5 * len(col_labels) + 2),
                                    max(3.5, 0.28 * len(row_labels) + 1.5)))
    im = ax.imshow(payoffs, aspect="auto", cmap="RdYlGn")
    ax.set_xticks(range(len(col_labels)), col_labels, rotation=45, ha="right", fontsize=7)
    ax.set_yticks(range(len(row_labels)), row_labels, fontsize=7)
    if highlight is not None:
        ax.add_patch(plt.Rectangle(
            (highlight[1] - 0.5, highlight[0] - 0.5), 1, 1,
            fill=False, edgecolor="blue", lw=2))
    ax.set_title("Payoff table (2 P(win) + P(draw))")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_replay_comparison(
    labels: list[str],
    recommended: list[float],
    actual: list[float],
    ylabel: str,
    title: str,
    path: str | Path,
):
    """Paired bars: model-recommended vs actually-taken decisions."""
    x = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.bar(x - 0.18, actual, width=0.36, label="actual", color="#c44e52")
    ax.bar(x + 0.18, recommended, width=0.36, label="optimised", color="#4c72b0")
    ax.set_xticks(x, labels)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_loss_curve(loss_log: list[float], path: str | Path):
    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    ax.plot(loss_log)
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss")
    ax.set_title("Payoff network training")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
