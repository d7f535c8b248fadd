"""Deterministic synthetic road-surface scenes for testing and regression.

A scene is a flat (optionally ramped) background with uniform noise, plus
dark crack bands along polylines, bright lane-marking stripes and small dark
specks that act as false-crack noise. The generator also emits the exact
ground-truth crack mask and the speck mask, so pipeline stages can be scored
against known geometry.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

__all__ = [
    "CrackSpec",
    "StripeSpec",
    "SyntheticSceneSpec",
    "SceneData",
    "generate_scene",
]

# cracks wider than twice this radius fill incompletely under the default
# bottom-hat element and lose contrast
_DEFAULT_BOTTOMHAT_RADIUS = 15


@dataclass(frozen=True)
class CrackSpec:
    """Dark band of given width along a polyline.

    With relative=True the intensity is an offset added to the local
    background (useful on ramped backgrounds); otherwise it is absolute.
    """

    points: tuple
    width: float = 9.0
    intensity: float = 0.25
    relative: bool = False

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        if len(pts) < 2:
            raise ValueError("crack polyline needs at least 2 points")
        if self.width <= 0:
            raise ValueError(f"crack width must be > 0, got {self.width}")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class StripeSpec:
    """Axis-aligned bright stripe (lane marking)."""

    position: int
    width: int
    intensity: float = 1.0
    orientation: str = "vertical"

    def __post_init__(self):
        if self.orientation not in ("vertical", "horizontal"):
            raise ValueError(f"stripe orientation must be vertical or horizontal, got {self.orientation!r}")
        if self.width < 1:
            raise ValueError(f"stripe width must be >= 1, got {self.width}")


@dataclass(frozen=True)
class SyntheticSceneSpec:
    width: int = 200
    height: int = 200
    background: float = 0.75
    noise: float = 0.02
    gradient: float = 0.0  # intensity ramp added left to right (+/- gradient/2)
    cracks: tuple = field(default_factory=tuple)
    stripes: tuple = field(default_factory=tuple)
    specks: int = 0
    speck_size: int = 1
    speck_intensity: float = 0.3
    speck_margin: float = 5.0  # min distance from cracks/stripes
    speck_spacing: float = 0.0  # min center-to-center distance between specks
    seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"bad scene dimensions {self.width}x{self.height}")
        if self.noise < 0:
            raise ValueError(f"noise amplitude must be >= 0, got {self.noise}")
        if self.specks < 0 or self.speck_size < 1:
            raise ValueError("specks must be >= 0 and speck_size >= 1")
        object.__setattr__(self, "cracks", tuple(self.cracks))
        object.__setattr__(self, "stripes", tuple(self.stripes))
        for crack in self.cracks:
            if crack.width >= 2 * _DEFAULT_BOTTOMHAT_RADIUS:
                warnings.warn(
                    f"crack width {crack.width} is not smaller than twice the default "
                    f"bottom-hat radius ({_DEFAULT_BOTTOMHAT_RADIUS}); detection may miss it",
                    stacklevel=2,
                )

    @classmethod
    def from_json(cls, text: str) -> "SyntheticSceneSpec":
        raw = json.loads(text)
        if not isinstance(raw, dict):
            raise ValueError("scene spec must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown scene spec fields: {sorted(unknown)}")
        cracks = tuple(CrackSpec(**c) for c in raw.pop("cracks", []))
        stripes = tuple(StripeSpec(**s) for s in raw.pop("stripes", []))
        return cls(cracks=cracks, stripes=stripes, **raw)

    @classmethod
    def load(cls, path: str | Path) -> "SyntheticSceneSpec":
        return cls.from_json(Path(path).read_text())

    def to_json(self) -> str:
        d = asdict(self)
        d["cracks"] = [asdict(c) for c in self.cracks]
        d["stripes"] = [asdict(s) for s in self.stripes]
        return json.dumps(d, indent=2)


@dataclass(frozen=True)
class SceneData:
    image: np.ndarray
    crack_mask: np.ndarray
    speck_mask: np.ndarray


def _polyline_band(spec: CrackSpec, height: int, width: int) -> np.ndarray:
    """Pixels within width/2 of the polyline (a stadium-shaped band)."""
    stamped = np.zeros((height, width), dtype=bool)
    pts = np.asarray(spec.points)
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        steps = int(np.ceil(np.hypot(x1 - x0, y1 - y0) * 4)) + 1
        xs = np.clip(np.rint(np.linspace(x0, x1, steps)).astype(int), 0, width - 1)
        ys = np.clip(np.rint(np.linspace(y0, y1, steps)).astype(int), 0, height - 1)
        stamped[ys, xs] = True
    return ndimage.distance_transform_edt(~stamped) <= spec.width / 2.0


def generate_scene(spec: SyntheticSceneSpec, seed: int | None = None) -> SceneData:
    """Render the scene; identical spec and seed give identical output.

    The image is quantized to the 8-bit lattice so in-memory results match a
    PGM round trip exactly.
    """
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    h, w = spec.height, spec.width
    ramp = spec.gradient * (np.arange(w) / max(w - 1, 1) - 0.5)
    base = np.full((h, w), spec.background) + ramp[None, :]
    local_bg = base.copy()

    stripe_mask = np.zeros((h, w), dtype=bool)
    for stripe in spec.stripes:
        lo, hi = stripe.position, stripe.position + stripe.width
        if stripe.orientation == "vertical":
            stripe_mask[:, max(0, lo) : max(0, hi)] = True
            base[:, max(0, lo) : max(0, hi)] = stripe.intensity
        else:
            stripe_mask[max(0, lo) : max(0, hi), :] = True
            base[max(0, lo) : max(0, hi), :] = stripe.intensity

    crack_mask = np.zeros((h, w), dtype=bool)
    for crack in spec.cracks:
        band = _polyline_band(crack, h, w)
        crack_mask |= band
        base[band] = (local_bg[band] + crack.intensity) if crack.relative else crack.intensity

    noise = rng.uniform(-spec.noise, spec.noise, (h, w)) if spec.noise > 0 else 0.0

    speck_mask = np.zeros((h, w), dtype=bool)
    if spec.specks > 0:
        # specks land anywhere except near cracks (dirt falls on markings too)
        clearance = ndimage.distance_transform_edt(~crack_mask) if crack_mask.any() else np.full((h, w), np.inf)
        margin = spec.speck_size + 1
        free = clearance > spec.speck_margin
        free[:margin, :] = free[-margin:, :] = False
        free[:, :margin] = free[:, -margin:] = False
        candidates = np.flatnonzero(free)
        if candidates.size < spec.specks:
            raise ValueError(f"scene too crowded for {spec.specks} specks ({candidates.size} free pixels)")
        order = rng.permutation(candidates)
        kept: list[tuple[int, int]] = []
        min_d2 = spec.speck_spacing * spec.speck_spacing
        for flat in order:
            y, x = divmod(int(flat), w)
            if min_d2 > 0 and any((y - ky) ** 2 + (x - kx) ** 2 < min_d2 for ky, kx in kept):
                continue
            kept.append((y, x))
            if len(kept) == spec.specks:
                break
        if len(kept) < spec.specks:
            raise ValueError(
                f"could not place {spec.specks} specks at spacing {spec.speck_spacing} "
                f"({len(kept)} placed)"
            )
        half = spec.speck_size // 2
        for y, x in kept:
            y0, x0 = y - half, x - half
            speck_mask[y0 : y0 + spec.speck_size, x0 : x0 + spec.speck_size] = True
        base[speck_mask] = spec.speck_intensity

    img = np.clip(base + noise, 0.0, 1.0)
    img = np.rint(img * 255.0) / 255.0
    return SceneData(image=img, crack_mask=crack_mask, speck_mask=speck_mask)
