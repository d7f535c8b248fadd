"""Median filtering over configurable neighborhoods (noise suppression)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Neighborhood", "median_filter"]

_SHAPES = ("square", "cross", "disk")


@dataclass(frozen=True)
class Neighborhood:
    """Filter window: an odd-sided square or cross, or a disk of given radius."""

    shape: str = "square"
    size: int = 3

    def __post_init__(self):
        if self.shape not in _SHAPES:
            raise ValueError(f"unknown neighborhood shape {self.shape!r}")
        if self.shape == "disk":
            if self.size < 0:
                raise ValueError(f"disk radius must be >= 0, got {self.size}")
        elif self.size < 1 or self.size % 2 == 0:
            raise ValueError(f"{self.shape} size must be odd and >= 1, got {self.size}")

    def offsets(self) -> np.ndarray:
        """(dx, dy) displacements of the window; always contains (0, 0)."""
        if self.shape == "square":
            c = self.size // 2
            d = np.arange(-c, c + 1)
            dx, dy = np.meshgrid(d, d)
            return np.column_stack([dx.ravel(), dy.ravel()])
        if self.shape == "cross":
            c = self.size // 2
            arm = np.arange(-c, c + 1)
            offs = [(d, 0) for d in arm] + [(0, d) for d in arm if d != 0]
            return np.array(offs, dtype=np.int64)
        r = self.size
        d = np.arange(-r, r + 1)
        dx, dy = np.meshgrid(d, d)
        keep = dx * dx + dy * dy <= r * r
        return np.column_stack([dx[keep], dy[keep]])


def median_filter(img: np.ndarray, nb: Neighborhood | None = None) -> np.ndarray:
    """Replace each pixel by the median of its in-bounds neighborhood values.

    The window is clipped at image borders (no padding); when the in-bounds
    count is even the lower-middle value of the sorted sequence is taken.
    Default neighborhood is the 3x3 square.
    """
    arr = np.asarray(img, dtype=np.float64)
    offs = (nb or Neighborhood()).offsets()
    h, w = arr.shape
    out = np.empty_like(arr)
    # row blocks bound the (offsets x rows x cols) scratch stack to ~32 MB
    block = max(1, int(4_000_000 // (len(offs) * max(w, 1))))
    for r0 in range(0, h, block):
        r1 = min(h, r0 + block)
        stack = np.full((len(offs), r1 - r0, w), np.inf)
        for k, (dx, dy) in enumerate(offs):
            y0, y1 = max(r0, -dy), min(r1, h - dy)
            x0, x1 = max(0, -dx), min(w, w - dx)
            if y0 < y1 and x0 < x1:
                stack[k, y0 - r0 : y1 - r0, x0:x1] = arr[y0 + dy : y1 + dy, x0 + dx : x1 + dx]
        stack.sort(axis=0)
        counts = np.isfinite(stack).sum(axis=0)
        pick = (counts - 1) // 2
        out[r0:r1] = np.take_along_axis(stack, pick[None], axis=0)[0]
    return out
