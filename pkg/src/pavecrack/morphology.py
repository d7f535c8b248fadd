"""Grayscale morphology and binary mask cleanup.

Flat structuring elements only, so erosion and dilation reduce to
neighborhood minimum/maximum. Offsets falling outside the image are skipped
(min/max over in-bounds values), which keeps borders unbiased. The bottom-hat
transform (closing minus the original) is the illumination equalizer of the
detection pipeline: it responds strongly to dark structures narrower than the
element and suppresses wide features such as lane markings.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

__all__ = [
    "StructuringElement",
    "gray_erode",
    "gray_dilate",
    "gray_open",
    "gray_close",
    "bottom_hat",
    "remove_small_components",
    "binary_spur_prune",
]


@dataclass(frozen=True, eq=False)
class StructuringElement:
    """Flat structuring element given by its (dx, dy) offset set.

    Offsets must be symmetric under negation so erosion and dilation use the
    same probe either way.
    """

    offsets: np.ndarray = field(repr=False)

    def __post_init__(self):
        offs = np.atleast_2d(np.asarray(self.offsets, dtype=np.int64))
        if offs.size == 0 or offs.shape[1] != 2:
            raise ValueError("structuring element needs a nonempty (K, 2) offset set")
        pairs = {(int(dx), int(dy)) for dx, dy in offs}
        if {(-dx, -dy) for dx, dy in pairs} != pairs:
            raise ValueError("structuring element offsets must be symmetric under negation")
        object.__setattr__(self, "offsets", offs)

    @classmethod
    def square(cls, side: int) -> "StructuringElement":
        if side < 1 or side % 2 == 0:
            raise ValueError(f"square side must be odd and >= 1, got {side}")
        c = side // 2
        d = np.arange(-c, c + 1)
        dx, dy = np.meshgrid(d, d)
        return cls(np.column_stack([dx.ravel(), dy.ravel()]))

    @classmethod
    def disk(cls, radius: float) -> "StructuringElement":
        if radius < 0:
            raise ValueError(f"disk radius must be >= 0, got {radius}")
        r = int(np.floor(radius))
        d = np.arange(-r, r + 1)
        dx, dy = np.meshgrid(d, d)
        keep = dx * dx + dy * dy <= radius * radius
        return cls(np.column_stack([dx[keep], dy[keep]]))


def gray_erode(f: np.ndarray, b: StructuringElement) -> np.ndarray:
    """Neighborhood minimum over the element (out-of-bounds offsets skipped)."""
    arr = np.asarray(f, dtype=np.float64)
    h, w = arr.shape
    out = np.full_like(arr, np.inf)
    for dx, dy in b.offsets:
        y0, y1 = max(0, -dy), min(h, h - dy)
        x0, x1 = max(0, -dx), min(w, w - dx)
        if y0 < y1 and x0 < x1:
            np.minimum(out[y0:y1, x0:x1], arr[y0 + dy : y1 + dy, x0 + dx : x1 + dx], out=out[y0:y1, x0:x1])
    return out


def gray_dilate(f: np.ndarray, b: StructuringElement) -> np.ndarray:
    """Neighborhood maximum over the reflected element (dual of gray_erode)."""
    arr = np.asarray(f, dtype=np.float64)
    h, w = arr.shape
    out = np.full_like(arr, -np.inf)
    for dx, dy in b.offsets:
        # f(s - x, t - y): gather with reflected offsets
        y0, y1 = max(0, dy), min(h, h + dy)
        x0, x1 = max(0, dx), min(w, w + dx)
        if y0 < y1 and x0 < x1:
            np.maximum(out[y0:y1, x0:x1], arr[y0 - dy : y1 - dy, x0 - dx : x1 - dx], out=out[y0:y1, x0:x1])
    return out


def gray_open(f: np.ndarray, b: StructuringElement) -> np.ndarray:
    """Erosion then dilation with the same element."""
    return gray_dilate(gray_erode(f, b), b)


def gray_close(f: np.ndarray, b: StructuringElement) -> np.ndarray:
    """Dilation then erosion with the same element."""
    return gray_erode(gray_dilate(f, b), b)


def bottom_hat(f: np.ndarray, b: StructuringElement) -> np.ndarray:
    """Closing minus the original, clamped to [0, 1].

    High response exactly where dark structures narrower than the element
    existed; flat regions and wide features map to ~0.
    """
    return np.clip(gray_close(f, b) - np.asarray(f, dtype=np.float64), 0.0, 1.0)


def remove_small_components(m: np.ndarray, min_area: int = 20, connectivity: int = 8) -> np.ndarray:
    """Drop foreground connected components smaller than min_area pixels."""
    if min_area < 1:
        raise ValueError(f"min_area must be >= 1, got {min_area}")
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    mask = np.asarray(m, dtype=bool)
    structure = np.ones((3, 3), dtype=bool) if connectivity == 8 else ndimage.generate_binary_structure(2, 1)
    labels, n = ndimage.label(mask, structure=structure)
    if n == 0:
        return mask.copy()
    areas = np.bincount(labels.ravel())
    keep = areas >= min_area
    keep[0] = False
    return keep[labels]


def _neighbor_counts(mask: np.ndarray) -> np.ndarray:
    p = np.pad(mask, 1).astype(np.uint8)
    return (
        p[:-2, :-2] + p[:-2, 1:-1] + p[:-2, 2:]
        + p[1:-1, :-2] + p[1:-1, 2:]
        + p[2:, :-2] + p[2:, 1:-1] + p[2:, 2:]
    )


def binary_spur_prune(m: np.ndarray, iterations: int = 3) -> np.ndarray:
    """Iteratively delete foreground pixels with exactly one 8-connected
    foreground neighbor (endpoint pruning)."""
    if iterations < 0:
        raise ValueError(f"iterations must be >= 0, got {iterations}")
    mask = np.asarray(m, dtype=bool).copy()
    for _ in range(iterations):
        spurs = mask & (_neighbor_counts(mask) == 1)
        if not spurs.any():
            break
        mask &= ~spurs
    return mask
