"""Detection scoring: Hausdorff distances and the SM similarity score.

The directed Hausdorff distance h(A, B) is the largest distance from a point
of A to its nearest point of B; the symmetric distance is the maximum of both
directions. Distances are exact Euclidean, computed from a distance transform
of the opposing mask.

SM is a buffered-match similarity in [0, 100]: the percentage of pixels in
either mask that find a counterpart in the other mask within the search
radius tau. Several SM-style scores exist in the literature; this package
always reports the buffered-match definition (the JSON report carries an
explicit ``sm_definition`` tag).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage

__all__ = [
    "EvaluationError",
    "EvalReport",
    "directed_hausdorff",
    "hausdorff",
    "sm_score",
    "evaluate",
]

SM_DEFINITION = "buffered-match"


class EvaluationError(ValueError):
    """Raised for empty masks or mismatched mask dimensions."""


@dataclass(frozen=True)
class EvalReport:
    """Distances, SM score and set sizes for one detected/reference pair.

    Distances are in pixels unless a pixel_size scale was applied; SM
    matching always happens in pixel units.
    """

    h_det_ref: float
    h_ref_det: float
    hausdorff: float
    sm: float
    detected_pixels: int
    reference_pixels: int
    tau: float
    pixel_size: float = 1.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sm_definition"] = SM_DEFINITION
        return d


def _checked_masks(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise EvaluationError(f"mask dimensions differ: {a.shape} vs {b.shape}")
    if not a.any() or not b.any():
        raise EvaluationError("masks must both contain foreground pixels")
    return a, b


def _distance_to(mask: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance from every pixel to the nearest mask pixel."""
    return ndimage.distance_transform_edt(~mask)


def directed_hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """max over a in A of the distance to the nearest point of B."""
    a, b = _checked_masks(a, b)
    return float(_distance_to(b)[a].max())


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance max(h(A, B), h(B, A))."""
    a, b = _checked_masks(a, b)
    dist_to_b = _distance_to(b)
    dist_to_a = _distance_to(a)
    return float(max(dist_to_b[a].max(), dist_to_a[b].max()))


def sm_score(detected: np.ndarray, reference: np.ndarray, tau: float = 2.0) -> float:
    """Buffered-match similarity in [0, 100] at search radius tau."""
    if tau < 0:
        raise ValueError(f"search radius tau must be >= 0, got {tau}")
    a, b = _checked_masks(detected, reference)
    matched = int((_distance_to(b)[a] <= tau).sum()) + int((_distance_to(a)[b] <= tau).sum())
    return 100.0 * matched / (int(a.sum()) + int(b.sum()))


def evaluate(
    detected: np.ndarray,
    reference: np.ndarray,
    tau: float = 2.0,
    pixel_size: float = 1.0,
) -> EvalReport:
    """Full report for one pair; pixel_size scales reported distances only."""
    if tau < 0:
        raise ValueError(f"search radius tau must be >= 0, got {tau}")
    if pixel_size <= 0:
        raise ValueError(f"pixel_size must be > 0, got {pixel_size}")
    a, b = _checked_masks(detected, reference)
    dist_to_b = _distance_to(b)
    dist_to_a = _distance_to(a)
    a_dists = dist_to_b[a]
    b_dists = dist_to_a[b]
    h_ab = float(a_dists.max())
    h_ba = float(b_dists.max())
    matched = int((a_dists <= tau).sum()) + int((b_dists <= tau).sum())
    sm = 100.0 * matched / (a_dists.size + b_dists.size)
    return EvalReport(
        h_det_ref=h_ab * pixel_size,
        h_ref_det=h_ba * pixel_size,
        hausdorff=max(h_ab, h_ba) * pixel_size,
        sm=sm,
        detected_pixels=int(a.sum()),
        reference_pixels=int(b.sum()),
        tau=float(tau),
        pixel_size=float(pixel_size),
    )
