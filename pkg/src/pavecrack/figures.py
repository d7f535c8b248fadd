"""Matplotlib figure rendering for the report paths of the CLI."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .evaluation import EvalReport
from .pipeline import DetectionResult

__all__ = ["render_detect_figures", "render_evaluate_figures"]

_STAGE_ORDER = ("invert", "median", "bottomhat", "binarize", "enhance")


def _imshow(ax, img, title):
    if img.dtype == bool:
        ax.imshow(img, cmap="gray", vmin=0, vmax=1, interpolation="nearest")
    else:
        ax.imshow(img, cmap="gray", vmin=0.0, vmax=1.0, interpolation="nearest")
    ax.set_title(title, fontsize=9)
    ax.set_axis_off()


def render_detect_figures(image: np.ndarray, result: DetectionResult, out_dir: str | Path) -> list[Path]:
    """Stage montage (plus saliency maps when collected) as PNG files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    panels = [("input", image)] + [(n, result.stages[n]) for n in _STAGE_ORDER if n in result.stages]
    cols = 3
    rows = (len(panels) + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(4 * cols, 4 * rows))
    axes = np.atleast_1d(axes).ravel()
    for ax, (name, img) in zip(axes, panels):
        _imshow(ax, img, name)
    for ax in axes[len(panels):]:
        ax.set_axis_off()
    fig.tight_layout()
    path = out_dir / "detect_stages.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    written.append(path)

    saliency = {k: v for k, v in result.debug.items() if hasattr(v, "stick")}
    if saliency:
        fig, axes = plt.subplots(len(saliency), 2, figsize=(8, 4 * len(saliency)), squeeze=False)
        for row, (name, maps) in enumerate(saliency.items()):
            for col, (kind, data) in enumerate((("stick", maps.stick), ("ball", maps.ball))):
                ax = axes[row][col]
                peak = data.max()
                ax.imshow(data / peak if peak > 0 else data, cmap="magma", interpolation="nearest")
                ax.set_title(f"{name} ({kind})", fontsize=9)
                ax.set_axis_off()
        fig.tight_layout()
        path = out_dir / "detect_saliency.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)
    return written


def render_evaluate_figures(
    detected: np.ndarray, reference: np.ndarray, report: EvalReport, out_dir: str | Path
) -> list[Path]:
    """Overlay of the two masks plus a match-distance histogram."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    overlay = np.zeros(detected.shape + (3,))
    overlay[..., 0] = detected  # red: detected only
    overlay[..., 1] = reference  # green: reference only; overlap shows yellow

    from scipy import ndimage

    dists = ndimage.distance_transform_edt(~reference)[detected]

    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(11, 5))
    ax0.imshow(overlay, interpolation="nearest")
    ax0.set_title("detected (red) vs reference (green)", fontsize=9)
    ax0.set_axis_off()
    if dists.size:
        ax1.hist(dists, bins=30, color="steelblue")
    ax1.axvline(report.tau, color="crimson", linestyle="--", label=f"tau = {report.tau:g}")
    ax1.set_xlabel("distance to reference (px)")
    ax1.set_ylabel("detected pixels")
    ax1.legend(fontsize=8)
    ax1.set_title(f"SM = {report.sm:.2f}   H = {report.hausdorff:.2f}", fontsize=9)
    fig.tight_layout()
    path = out_dir / "evaluate_overlay.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return [path]
