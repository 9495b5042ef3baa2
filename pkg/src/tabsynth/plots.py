"""Figure rendering for comparison reports.

The CLI's report path writes these figures next to the JSON/text output:
one histogram overlay per attribute, the two mutual-information heatmaps,
and (in correlated mode) the fitted network graphs.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LinearSegmentedColormap

from .distributions import BAR_CHART
from .inspector import ComparisonReport

#: Blue (no dependence) through yellow (moderate) to red (strong), pinned 0..1.
MI_COLORMAP = LinearSegmentedColormap.from_list(
    "dependence", ["#313695", "#fee090", "#a50026"]
)

_INPUT_COLOR = "#4878d0"
_SYNTH_COLOR = "#ee854a"


def _slug(name: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in name)


def plot_attribute_comparison(attr, path: Path) -> None:
    """Overlayed input/synthetic probabilities for one attribute."""
    fig, ax = plt.subplots(figsize=(7, 4))
    p = np.asarray(attr.input_distribution.probabilities)
    q = np.asarray(attr.synthetic_distribution.probabilities)
    if attr.input_distribution.kind == BAR_CHART:
        labels = list(attr.input_distribution.labels)
        x = np.arange(len(labels))
        ax.bar(x - 0.2, p, width=0.4, label="input", color=_INPUT_COLOR)
        ax.bar(x + 0.2, q, width=0.4, label="synthetic", color=_SYNTH_COLOR)
        ax.set_xticks(x)
        ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    else:
        edges = np.asarray(attr.input_distribution.edges)
        centers = (edges[:-1] + edges[1:]) / 2
        width = (edges[1] - edges[0]) * 0.4
        ax.bar(centers - width / 2, p, width=width, label="input", color=_INPUT_COLOR)
        ax.bar(centers + width / 2, q, width=width, label="synthetic", color=_SYNTH_COLOR)
    kl = attr.kl_divergence_bits
    title = attr.name if kl is None else f"{attr.name}  (KL {kl:.4f} bits)"
    ax.set_title(title)
    ax.set_ylabel("probability")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_mi_heatmaps(report: ComparisonReport, path: Path) -> None:
    """Side-by-side normalized MI heatmaps for input and synthetic tables."""
    names = list(report.columns)
    fig, axes = plt.subplots(1, 2, figsize=(6 + len(names), 3 + len(names) * 0.5))
    for ax, matrix, title in (
        (axes[0], report.mi_input, "input"),
        (axes[1], report.mi_synthetic, "synthetic"),
    ):
        im = ax.imshow(matrix, cmap=MI_COLORMAP, vmin=0.0, vmax=1.0)
        ax.set_xticks(range(len(names)))
        ax.set_yticks(range(len(names)))
        ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
        ax.set_yticklabels(names, fontsize=8)
        ax.set_title(f"pairwise MI: {title}")
        for i in range(len(names)):
            for j in range(len(names)):
                ax.text(j, i, f"{matrix[i, j]:.2f}", ha="center", va="center", fontsize=7)
    fig.colorbar(im, ax=axes, fraction=0.03)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def plot_network(edges: tuple[tuple[str, str], ...], names: list[str], title: str, path: Path) -> None:
    """Attribute nodes on a circle with directed parent->child arrows."""
    fig, ax = plt.subplots(figsize=(6, 6))
    pos = {
        name: (math.cos(2 * math.pi * i / len(names)), math.sin(2 * math.pi * i / len(names)))
        for i, name in enumerate(names)
    }
    for parent, child in edges:
        x0, y0 = pos[parent]
        x1, y1 = pos[child]
        ax.annotate(
            "",
            xy=(x1, y1),
            xytext=(x0, y0),
            arrowprops=dict(arrowstyle="-|>", color="gray", shrinkA=18, shrinkB=18),
        )
    for name, (x, y) in pos.items():
        ax.plot(x, y, "o", markersize=28, color="#c6dbef", zorder=3)
        ax.text(x, y, name, ha="center", va="center", fontsize=8, zorder=4)
    ax.set_title(title)
    ax.set_xlim(-1.4, 1.4)
    ax.set_ylim(-1.4, 1.4)
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report(report: ComparisonReport, out_dir: str | Path) -> list[Path]:
    """Write every figure the report supports into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for attr in report.attributes:
        if attr.input_distribution is None or attr.synthetic_distribution is None:
            continue
        path = out / f"hist_{_slug(attr.name)}.png"
        plot_attribute_comparison(attr, path)
        written.append(path)
    heatmap = out / "mi_heatmaps.png"
    plot_mi_heatmaps(report, heatmap)
    written.append(heatmap)
    names = list(report.columns)
    if report.input_network_edges is not None:
        path = out / "network_input.png"
        plot_network(report.input_network_edges, names, "network: input", path)
        written.append(path)
    if report.synthetic_network_edges is not None:
        path = out / "network_synthetic.png"
        plot_network(report.synthetic_network_edges, names, "network: synthetic", path)
        written.append(path)
    return written
