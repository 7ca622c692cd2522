"""Report figures: ECT heatmaps, Euler characteristic curves, loss traces, point clouds.

Figures are built with the object API on the Agg canvas, so nothing here
touches pyplot's global state or needs a display.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .ect_exact import EctMatrix, normalize_columns

FIG_WIDTH = 6.0
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
DPI = 120

RC = {
    "axes.labelsize": 10,
    "font.size": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
}


def _figure(width: float = FIG_WIDTH, height: Optional[float] = None, ncols: int = 1):
    import matplotlib as mpl

    with mpl.rc_context(RC):
        fig = Figure(figsize=(width, height or width * GOLDEN), dpi=DPI)
        FigureCanvasAgg(fig)
        axes = fig.subplots(1, ncols)
    return fig, axes


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    # no timestamp or software tag, so identical data gives identical bytes
    fig.savefig(path, metadata={"Software": None})
    return path


def save_ect_heatmap(matrix: EctMatrix, path, *, column_normalized: bool = False, title: str = "") -> Path:
    """Rows are thresholds with the lowest at the top; columns are directions."""
    values = np.asarray(matrix.values, dtype=np.float64)
    if column_normalized:
        values = normalize_columns(values)
    fig, ax = _figure()
    im = ax.imshow(values, aspect="auto", interpolation="nearest", cmap="viridis", origin="upper")
    ax.set_xlabel("direction index")
    if matrix.strategy == "global":
        t = matrix.thresholds.values
        ticks = np.linspace(0, len(t) - 1, min(5, len(t))).round().astype(int)
        ax.set_yticks(ticks)
        ax.set_yticklabels([f"{t[i]:.2f}" for i in ticks])
        ax.set_ylabel("threshold t")
    else:
        ax.set_ylabel("threshold index (per direction)")
    fig.colorbar(im, ax=ax, label="column-normalized" if column_normalized else "Euler characteristic")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def save_ecc_plot(thresholds: Sequence[float], curves: dict, path, *, title: str = "") -> Path:
    """One step or line plot per named curve over shared thresholds."""
    fig, ax = _figure()
    t = np.asarray(thresholds, dtype=np.float64)
    for label, values in curves.items():
        values = np.asarray(values)
        if np.issubdtype(values.dtype, np.integer):
            ax.step(t, values, where="post", label=label)
        else:
            ax.plot(t, values, label=label)
    ax.set_xlabel("threshold t")
    ax.set_ylabel("Euler characteristic")
    if len(curves) > 1:
        ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def save_loss_curve(steps: Sequence[int], losses: Sequence[float], path, *, title: str = "") -> Path:
    fig, ax = _figure()
    losses = np.asarray(losses, dtype=np.float64)
    ax.plot(steps, losses, color="black", lw=1)
    if np.all(losses > 0):
        ax.set_yscale("log")
    ax.set_xlabel("step")
    ax.set_ylabel("MSE")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def save_point_clouds(panels: dict, path, *, overlay: Optional[tuple[str, str]] = None) -> Path:
    """Side-by-side scatter panels; ``overlay=(a, b)`` adds a panel drawing ``b`` over ``a``."""
    names = list(panels)
    ncols = len(names) + (1 if overlay else 0)
    fig, axes = _figure(width=3.0 * ncols, height=3.0, ncols=ncols)
    axes = np.atleast_1d(axes)
    for ax, name in zip(axes, names):
        pts = np.asarray(panels[name])
        ax.scatter(pts[:, 0], pts[:, 1], s=4, color="black")
        ax.set_title(name)
    if overlay:
        ax = axes[-1]
        a, b = overlay
        pa, pb = np.asarray(panels[a]), np.asarray(panels[b])
        ax.scatter(pa[:, 0], pa[:, 1], s=4, color="black", label=a)
        ax.scatter(pb[:, 0], pb[:, 1], s=4, color="#c41e3a", label=b)
        ax.set_title(f"{b} over {a}")
    for ax in axes:
        ax.set_aspect("equal")
        ax.set_axis_off()
    return _save(fig, path)
