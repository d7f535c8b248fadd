"""Binarization: local-adaptive thresholding (Singh) and the Otsu baseline.

The Singh rule derives a per-pixel threshold from the local window mean m and
the deviation d = I - m:

    T = m * (1 + k * (d / (1 - d) - 1))

with bias k in [0, 1]. Larger k lowers the threshold, admitting more
foreground. Means come from the integral image, so the cost is independent
of window size. A pixel is foreground iff I > T (strict), which assumes the
structures of interest are brighter than their surroundings - the polarity
the bottom-hat response delivers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import build_integral, window_mean_map

__all__ = ["SinghParams", "singh_threshold", "otsu_threshold"]


@dataclass(frozen=True)
class SinghParams:
    """Bias k in [0, 1] and odd window size w >= 3."""

    k: float = 0.06
    w: int = 51

    def __post_init__(self):
        if not 0.0 <= self.k <= 1.0:
            raise ValueError(f"bias k must be in [0, 1], got {self.k}")
        if self.w < 3 or self.w % 2 == 0:
            raise ValueError(f"window size w must be odd and >= 3, got {self.w}")


def _apply_rule(values: np.ndarray, means: np.ndarray, k: float) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the threshold rule given precomputed local means.

    Returns (foreground, thresholds). Pixels where the deviation reaches 1
    (denominator vanishes) count as maximal positive deviation and are forced
    foreground.
    """
    dev = values - means
    denom = 1.0 - dev
    degenerate = np.abs(denom) < 1e-9
    safe = np.where(degenerate, 1.0, denom)
    thresholds = means * (1.0 + k * (dev / safe - 1.0))
    fg = values > thresholds
    fg |= degenerate
    return fg, thresholds


def singh_threshold(img: np.ndarray, p: SinghParams | None = None) -> np.ndarray:
    """Local-adaptive binarization of a [0, 1] image; foreground iff I > T."""
    p = p or SinghParams()
    arr = np.asarray(img, dtype=np.float64)
    means = window_mean_map(build_integral(arr), p.w)
    fg, _ = _apply_rule(arr, means, p.k)
    return fg


def otsu_threshold(img: np.ndarray) -> np.ndarray:
    """Global binarization maximizing between-class variance on the 8-bit
    histogram; foreground is strictly above the threshold.

    A single-valued image yields that value as the threshold, hence an empty
    foreground.
    """
    q = np.rint(np.asarray(img, dtype=np.float64) * 255.0).astype(np.int64)
    hist = np.bincount(q.ravel(), minlength=256).astype(np.float64)
    total = q.size
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)
    m0 = np.cumsum(hist * levels)
    w1 = total - w0
    valid = (w0 > 0) & (w1 > 0)
    if not valid.any():
        return np.zeros_like(q, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = m0 / w0
        mu1 = (m0[-1] - m0) / w1
    var = np.where(valid, w0 * w1 * (mu0 - mu1) ** 2, -1.0)
    t = int(np.argmax(var))  # first maximum: deterministic tie rule
    return q > t
