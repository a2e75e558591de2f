"""Report figures written next to the manifest.

Rendering goes through the Agg backend with the PNG ``Software`` tag
dropped, so identical inputs give byte-identical files.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 100,
}
_PNG_META = {"Software": None}


def _save(fig, path):
    fig.savefig(path, format="png", metadata=_PNG_META)
    plt.close(fig)


def plot_motion_proxies(pair_proxies, selected, threshold: float, path, title="motion proxy per pair"):
    """Bar chart of per-pair proxies with the selection threshold."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 3.0))
        idx = [i for i, _ in pair_proxies]
        vals = [p for _, p in pair_proxies]
        chosen = set(selected)
        colors = ["#d95f02" if i in chosen else "#7570b3" for i in idx]
        ax.bar(idx, vals, color=colors, width=0.8)
        ax.axhline(threshold, color="k", lw=1.0, ls="--", label=f"threshold {threshold:.3g} px")
        ax.set_xlabel("pair index")
        ax.set_ylabel("proxy [px]")
        ax.set_title(title)
        ax.legend(loc="upper left", frameon=False)
        fig.tight_layout()
        _save(fig, path)


def plot_trajectories(trajectories, path, background=None, width=None, height=None):
    """Trajectories as polylines, optionally over a background frame.

    ``background`` is an (H, W) or (H, W, 3) array in [0, 1].
    """
    if background is not None:
        height, width = background.shape[:2]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 5.0 * height / width))
        if background is not None:
            img = background[:, :, 0] if background.ndim == 3 and background.shape[2] == 1 else background
            ax.imshow(img, cmap="gray" if img.ndim == 2 else None, vmin=0.0, vmax=1.0, interpolation="nearest")
        for tr in trajectories:
            pts = np.asarray(tr.points)
            ax.plot(pts[:, 0], pts[:, 1], color="#1b9e77", lw=0.8)
            ax.plot(pts[-1, 0], pts[-1, 1], "o", color="#d95f02", ms=1.5)
        ax.set_xlim(-0.5, width - 0.5)
        ax.set_ylim(height - 0.5, -0.5)
        ax.set_aspect("equal")
        ax.axis("off")
        fig.tight_layout(pad=0.1)
        _save(fig, path)
