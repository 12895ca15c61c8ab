"""Figure rendering for experiment results.

Phase grids are drawn as heatmaps with the overlap ratio on x and either
the log oversampling ratio or the common energy on y.  Output is
deterministic: SVG ids are salted and date metadata is stripped, so a
rerun writes byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "ompclust"

import matplotlib.pyplot as plt
import numpy as np


def _edges(centers):
    centers = np.asarray(centers, dtype=float)
    if centers.size == 1:
        half = 0.5 if centers[0] == 0 else 0.5 * abs(centers[0])
        return np.array([centers[0] - half, centers[0] + half])
    mids = 0.5 * (centers[1:] + centers[:-1])
    first = centers[0] - (mids[0] - centers[0])
    last = centers[-1] + (centers[-1] - mids[-1])
    return np.concatenate([[first], mids, [last]])


def phase_heatmap(phase_grids, path):
    """Render one heatmap panel per phase grid and save the figure.

    The output format follows the file extension (e.g. .svg, .png).
    """
    grids = list(phase_grids)
    fig, axes = plt.subplots(1, len(grids), figsize=(5.2 * len(grids), 4.2),
                             squeeze=False)
    spec = grids[0].grid
    if spec.second_axis == "rho":
        y_centers = np.log10(np.asarray(spec.second_values))
        y_label = "log10 oversampling ratio"
    else:
        y_centers = np.asarray(spec.second_values)
        y_label = "common energy"
    x_edges = _edges(spec.delta_values)
    y_edges = _edges(y_centers)
    mesh = None
    for ax, pg in zip(axes[0], grids):
        mesh = ax.pcolormesh(x_edges, y_edges, pg.p_efs, vmin=0.0, vmax=1.0,
                             cmap="viridis")
        ax.set_xlabel("overlap ratio")
        ax.set_ylabel(y_label)
        ax.set_title(f"P(EFS), {pg.method}")
    fig.colorbar(mesh, ax=axes[0], fraction=0.046, pad=0.04)
    _save(fig, path)


def efs_curves(deltas, curves, path, title="P(EFS) vs overlap ratio"):
    """Line plot of EFS probability against overlap for named methods."""
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    for name, values in curves.items():
        style = "--" if name.lower().startswith("nn") else "-"
        ax.plot(deltas, values, style, marker="o", label=name)
    ax.set_xlabel("overlap ratio")
    ax.set_ylabel("P(EFS)")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title)
    ax.legend()
    _save(fig, path)


def _save(fig, path):
    fig.savefig(str(path), metadata={"Date": None} if str(path).endswith(".svg") else None,
                bbox_inches="tight")
    plt.close(fig)
