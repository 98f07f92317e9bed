"""Figure rendering. All figures are written as SVG with fixed hash salt and
no embedded date so identical inputs produce byte-identical files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "spectralnav"

import matplotlib.pyplot as plt
import numpy as np

_SVG_KWARGS = {"format": "svg", "metadata": {"Date": None}}


def save_score_nds_scatter(path: str, nds_values: list[float], scores: list[float], rho: float) -> None:
    """One marker per (nds, score) pair."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.scatter(nds_values, scores, s=12, alpha=0.6, edgecolors="none")
    ax.set_xlabel("normalized distance sum")
    ax.set_ylabel("navigation score")
    ax.set_title(f"score vs. trajectory quality (Spearman rho = {rho:.3f})")
    fig.tight_layout()
    fig.savefig(path, **_SVG_KWARGS)
    plt.close(fig)


def save_similarity_heatmap(path: str, matrix: np.ndarray, tokens: list[int]) -> None:
    """Trajectory-step by instruction-token similarity heatmap."""
    fig, ax = plt.subplots(figsize=(4.8, 4.0))
    im = ax.imshow(matrix, aspect="auto", cmap="viridis", origin="upper")
    ax.set_xlabel("instruction token")
    ax.set_ylabel("trajectory step")
    ax.set_xticks(range(len(tokens)), [str(t) for t in tokens])
    ax.set_yticks(range(matrix.shape[0]))
    fig.colorbar(im, ax=ax, label="dot product")
    fig.tight_layout()
    fig.savefig(path, **_SVG_KWARGS)
    plt.close(fig)


def save_policy_bars(path: str, rows: list[dict]) -> None:
    """Success-rate and SPL bars, one group per exploit policy."""
    policies = [row["policy"] for row in rows]
    x = np.arange(len(policies))
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(x - 0.2, [row["sr"] for row in rows], width=0.4, label="SR")
    ax.bar(x + 0.2, [row["spl"] for row in rows], width=0.4, label="SPL")
    ax.set_xticks(x, policies)
    ax.set_ylim(0, 1)
    ax.set_ylabel("value")
    ax.set_title("exploitation policy comparison")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SVG_KWARGS)
    plt.close(fig)
