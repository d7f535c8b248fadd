"""Sparse 2-D tensor voting for crack enhancement.

Foreground pixels become tokens carrying 2x2 symmetric positive-semidefinite
tensors. Each token casts votes to the other tokens inside its field radius;
a vote's strength decays with the arc length s and curvature kappa of the
smoothest circular path joining voter and receiver at scale sigma:

    DF(s, kappa, sigma) = exp(-(s^2 + c * kappa^2) / sigma^2)
    c = -16 * ln(0.1) * (sigma - 1) / pi^2

Stick votes are confined to a 45-degree aperture around the voter tangent
and carry the rank-1 tensor of the propagated normal; ball votes average the
stick field over all voter orientations. Eigen-decomposing the accumulated
tensor at each token gives line saliency (l1 - l2, normal e1) and point
saliency (l2), which drive the multi-scale enhancement cascade: point-like
noise collects almost no aligned support and falls below the saliency
thresholds, while curvilinear cracks reinforce each other.

Accumulation runs in raster order of the voters, so results are bit-identical
across runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .morphology import binary_spur_prune, remove_small_components

__all__ = [
    "DF_CUTOFF",
    "VoteGeometry",
    "decay",
    "stick_vote",
    "VotingField",
    "build_stick_field",
    "build_ball_field",
    "TokenField",
    "sparse_vote",
    "eigen_decompose",
    "SaliencyMaps",
    "MultiScaleParams",
    "multiscale_enhance",
]

# Votes attenuated below this are dropped entirely when fields are applied;
# the field grid extends to ceil(3 * sigma), safely past the cutoff.
DF_CUTOFF = 0.01
_THETA_MAX = math.pi / 4.0


def _curvature_weight(sigma: float) -> float:
    return -16.0 * math.log(0.1) * (sigma - 1.0) / math.pi**2


def decay(s, kappa, sigma: float):
    """Vote attenuation DF(s, kappa, sigma); 1 at the origin, exp(-1) at s =
    sigma on a straight path. Attenuation stays within [0, 1] for sigma >= 1."""
    if sigma <= 0:
        raise ValueError(f"scale sigma must be > 0, got {sigma}")
    s = np.asarray(s, dtype=np.float64)
    kappa = np.asarray(kappa, dtype=np.float64)
    c = _curvature_weight(sigma)
    out = np.exp(-(s * s + c * kappa * kappa) / (sigma * sigma))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class VoteGeometry:
    """Path geometry between a voter at the origin and one receiver.

    theta is the angle between the voter tangent and the voter->receiver
    direction, folded into [-pi/2, pi/2]; s and kappa are the arc length and
    curvature of the osculating circle (s = l, kappa = 0 in the straight
    limit).
    """

    l: float
    theta: float
    s: float
    kappa: float

    @classmethod
    def from_offset(cls, offset, voter_normal=(0.0, 1.0)) -> "VoteGeometry":
        dx, dy = float(offset[0]), float(offset[1])
        nx, ny = _unit(voter_normal)
        u = ny * dx - nx * dy  # tangent component
        v = nx * dx + ny * dy  # normal component
        l = math.hypot(u, v)
        if l == 0.0:
            return cls(0.0, 0.0, 0.0, 0.0)
        theta = math.atan2(v, u)
        if theta > math.pi / 2:
            theta -= math.pi
        elif theta < -math.pi / 2:
            theta += math.pi
        at = abs(theta)
        if at < 1e-12:
            return cls(l, theta, l, 0.0)
        return cls(l, theta, at * l / math.sin(at), 2.0 * math.sin(at) / l)


def _unit(vec) -> tuple[float, float]:
    x, y = float(vec[0]), float(vec[1])
    n = math.hypot(x, y)
    if n == 0.0:
        raise ValueError("zero-length normal vector")
    return x / n, y / n


def _canonical_stick(u, v, sigma: float, truncate: bool):
    """Stick vote tensor components for a voter at the origin, normal = +v.

    u, v are offset components in the voter frame (tangent along +u). Offsets
    beyond the 45-degree aperture vote zero; with `truncate`, so do votes
    attenuated below DF_CUTOFF. Returns (t11, t12, t22) arrays in the voter
    frame.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    l = np.hypot(u, v)
    phi = np.arctan2(v, u)
    theta = np.where(phi > math.pi / 2, phi - math.pi, phi)
    theta = np.where(theta < -math.pi / 2, theta + math.pi, theta)
    at = np.abs(theta)
    sin_t = np.sin(at)
    straight = at < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(straight, l, at * l / np.where(sin_t == 0, 1.0, sin_t))
        kappa = np.where(straight, 0.0, 2.0 * sin_t / np.where(l == 0, 1.0, l))
    df = decay(s, kappa, sigma)
    keep = (l > 0) & (at <= _THETA_MAX + 1e-12)
    if truncate:
        keep &= df >= DF_CUTOFF
    w = np.where(keep, df, 0.0)
    n1 = -np.sin(2.0 * theta)
    n2 = np.cos(2.0 * theta)
    return w * n1 * n1, w * n1 * n2, w * n2 * n2


def _rotate_sym(a, b, c, tangent, normal):
    """Rotate symmetric tensor components from the voter frame into the image
    frame, where `tangent` and `normal` are the images of the frame axes."""
    t1, t2 = tangent
    n1, n2 = normal
    # R @ [[a, b], [b, c]] @ R.T with R = [[t1, n1], [t2, n2]]
    ra1 = t1 * a + n1 * b
    ra2 = t1 * b + n1 * c
    rb1 = t2 * a + n2 * b
    rb2 = t2 * b + n2 * c
    return ra1 * t1 + ra2 * n1, ra1 * t2 + ra2 * n2, rb1 * t2 + rb2 * n2


def stick_vote(voter_normal, offset, sigma: float) -> np.ndarray:
    """Tensor cast by a unit stick voter at the origin onto one receiver.

    Zero beyond the 45-degree aperture; otherwise the decay-weighted rank-1
    tensor of the propagated normal, expressed in the image frame.
    """
    nx, ny = _unit(voter_normal)
    dx, dy = float(offset[0]), float(offset[1])
    if dx == 0.0 and dy == 0.0:
        raise ValueError("offset must be nonzero")
    u = ny * dx - nx * dy
    v = nx * dx + ny * dy
    a, b, c = _canonical_stick(u, v, sigma, truncate=False)
    i11, i12, i22 = _rotate_sym(a, b, c, (ny, -nx), (nx, ny))
    return np.array([[i11, i12], [i12, i22]], dtype=np.float64)


@dataclass(frozen=True)
class VotingField:
    """Precomputed vote tensors for one scale on the integer offset grid.

    grid[radius + dy, radius + dx] is the tensor received at offset (dx, dy)
    from a canonical voter at the origin (normal +y for stick fields; any
    orientation for ball fields, which are orientation-free).
    """

    kind: str
    sigma: float
    radius: int
    grid: np.ndarray = field(repr=False)

    def tensor_at(self, dx: int, dy: int) -> np.ndarray:
        return self.grid[self.radius + dy, self.radius + dx]


def field_radius(sigma: float) -> int:
    return int(math.ceil(3.0 * sigma))


def _offset_grids(radius: int) -> tuple[np.ndarray, np.ndarray]:
    d = np.arange(-radius, radius + 1, dtype=np.float64)
    return np.meshgrid(d, d)  # DX, DY with grid[R + dy, R + dx]


def build_stick_field(sigma: float) -> VotingField:
    """Canonical stick field (voter normal +y) out to radius ceil(3 sigma)."""
    radius = field_radius(sigma)
    dx, dy = _offset_grids(radius)
    t11, t12, t22 = _canonical_stick(dx, dy, sigma, truncate=True)
    grid = np.empty((2 * radius + 1, 2 * radius + 1, 2, 2))
    grid[..., 0, 0] = t11
    grid[..., 0, 1] = t12
    grid[..., 1, 0] = t12
    grid[..., 1, 1] = t22
    return VotingField("stick", float(sigma), radius, grid)


def build_ball_field(sigma: float, n_angles: int = 180) -> VotingField:
    """Orientation-free field: the stick field averaged over n_angles uniform
    voter orientations in [0, pi)."""
    if n_angles < 8:
        raise ValueError(f"n_angles must be >= 8, got {n_angles}")
    radius = field_radius(sigma)
    dx, dy = _offset_grids(radius)
    acc11 = np.zeros_like(dx)
    acc12 = np.zeros_like(dx)
    acc22 = np.zeros_like(dx)
    for k in range(n_angles):
        alpha = math.pi * k / n_angles
        tangent = (math.cos(alpha), math.sin(alpha))
        normal = (-math.sin(alpha), math.cos(alpha))
        u = tangent[0] * dx + tangent[1] * dy
        v = normal[0] * dx + normal[1] * dy
        a, b, c = _canonical_stick(u, v, sigma, truncate=True)
        i11, i12, i22 = _rotate_sym(a, b, c, tangent, normal)
        acc11 += i11
        acc12 += i12
        acc22 += i22
    grid = np.empty((2 * radius + 1, 2 * radius + 1, 2, 2))
    grid[..., 0, 0] = acc11 / n_angles
    grid[..., 0, 1] = acc12 / n_angles
    grid[..., 1, 0] = acc12 / n_angles
    grid[..., 1, 1] = acc22 / n_angles
    return VotingField("ball", float(sigma), radius, grid)


def _eigen_fields(t11, t12, t22):
    """Closed-form eigen-decomposition of symmetric 2x2 tensors (vectorized).

    Returns (l1, l2, e1x, e1y) with l1 >= l2 and unit e1.
    """
    half = 0.5 * (t11 - t22)
    mid = 0.5 * (t11 + t22)
    disc = np.sqrt(half * half + t12 * t12)
    l1 = mid + disc
    l2 = mid - disc
    vx = disc + half
    vy = t12
    n = np.hypot(vx, vy)
    ok = n > 1e-15
    safe = np.where(ok, n, 1.0)
    e1x = np.where(ok, vx / safe, 0.0)
    e1y = np.where(ok, vy / safe, 1.0)
    return l1, l2, e1x, e1y


def eigen_decompose(t: np.ndarray):
    """(l1, l2, e1, e2) of a symmetric 2x2 tensor, l1 >= l2, unit e1 _|_ e2."""
    t = np.asarray(t, dtype=np.float64)
    l1, l2, e1x, e1y = _eigen_fields(t[0, 0], t[0, 1], t[1, 1])
    e1 = np.array([e1x, e1y])
    e2 = np.array([-e1y, e1x])
    return float(l1), float(l2), e1, e2


@dataclass
class TokenField:
    """Sparse set of pixel tokens with their tensors, in raster order."""

    width: int
    height: int
    coords: np.ndarray  # (N, 2) int64 columns x, y
    tensors: np.ndarray  # (N, 2, 2) float64

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "TokenField":
        """Encode foreground pixels as unit ball tensors (identity)."""
        mask = np.asarray(mask, dtype=bool)
        ys, xs = np.nonzero(mask)
        n = xs.size
        tensors = np.zeros((n, 2, 2))
        tensors[:, 0, 0] = 1.0
        tensors[:, 1, 1] = 1.0
        h, w = mask.shape
        return cls(w, h, np.column_stack([xs, ys]).astype(np.int64), tensors)

    def __len__(self) -> int:
        return self.coords.shape[0]

    def saliency(self):
        """Per-token (stick, ball, e1x, e1y) from the current tensors."""
        t = self.tensors
        l1, l2, e1x, e1y = _eigen_fields(t[:, 0, 0], t[:, 0, 1], t[:, 1, 1])
        return l1 - l2, l2, e1x, e1y

    def to_mask(self) -> np.ndarray:
        mask = np.zeros((self.height, self.width), dtype=bool)
        if len(self):
            mask[self.coords[:, 1], self.coords[:, 0]] = True
        return mask

    def select(self, keep: np.ndarray) -> "TokenField":
        return TokenField(self.width, self.height, self.coords[keep], self.tensors[keep])


@dataclass(frozen=True)
class SaliencyMaps:
    """Dense per-pixel saliency rasters: stick = l1 - l2, ball = l2."""

    stick: np.ndarray
    ball: np.ndarray


def _token_index(tokens: TokenField) -> np.ndarray:
    index = np.full((tokens.height, tokens.width), -1, dtype=np.int64)
    index[tokens.coords[:, 1], tokens.coords[:, 0]] = np.arange(len(tokens))
    return index


def _neighbors(index: np.ndarray, x: int, y: int, radius: int, self_id: int):
    """Token ids and integer offsets inside the field window around (x, y)."""
    h, w = index.shape
    y0, y1 = max(0, y - radius), min(h, y + radius + 1)
    x0, x1 = max(0, x - radius), min(w, x + radius + 1)
    sub = index[y0:y1, x0:x1]
    ry, rx = np.nonzero(sub >= 0)
    ids = sub[ry, rx]
    keep = ids != self_id
    return ids[keep], rx[keep] + x0 - x, ry[keep] + y0 - y


def sparse_vote(tokens: TokenField, field: VotingField) -> TokenField:
    """One voting pass: every token accumulates the votes of the other tokens
    within the field radius.

    Ball fields vote by grid lookup (offsets between pixels are integers, so
    the lookup is exact). Stick fields are cast along each voter's current e1
    and evaluated analytically - the canonical field rotated exactly rather
    than resampled. Voters are processed in raster order; a token never votes
    for itself. Returns a new TokenField holding the accumulated tensors.
    """
    n = len(tokens)
    acc = np.zeros((n, 3))
    if n == 0:
        return TokenField(tokens.width, tokens.height, tokens.coords.copy(), np.zeros((0, 2, 2)))
    index = _token_index(tokens)
    radius = field.radius
    if field.kind == "ball":
        g11 = field.grid[..., 0, 0]
        g12 = field.grid[..., 0, 1]
        g22 = field.grid[..., 1, 1]
        for i in range(n):
            x, y = tokens.coords[i]
            ids, dx, dy = _neighbors(index, int(x), int(y), radius, i)
            if ids.size == 0:
                continue
            gy, gx = dy + radius, dx + radius
            acc[ids, 0] += g11[gy, gx]
            acc[ids, 1] += g12[gy, gx]
            acc[ids, 2] += g22[gy, gx]
    elif field.kind == "stick":
        _, _, e1x, e1y = tokens.saliency()
        sigma = field.sigma
        for i in range(n):
            x, y = tokens.coords[i]
            ids, dx, dy = _neighbors(index, int(x), int(y), radius, i)
            if ids.size == 0:
                continue
            nx, ny = e1x[i], e1y[i]
            tangent = (ny, -nx)
            u = tangent[0] * dx + tangent[1] * dy
            v = nx * dx + ny * dy
            a, b, c = _canonical_stick(u, v, sigma, truncate=True)
            i11, i12, i22 = _rotate_sym(a, b, c, tangent, (nx, ny))
            acc[ids, 0] += i11
            acc[ids, 1] += i12
            acc[ids, 2] += i22
    else:
        raise ValueError(f"unknown field kind {field.kind!r}")
    tensors = np.empty((n, 2, 2))
    tensors[:, 0, 0] = acc[:, 0]
    tensors[:, 0, 1] = acc[:, 1]
    tensors[:, 1, 0] = acc[:, 1]
    tensors[:, 1, 1] = acc[:, 2]
    return TokenField(tokens.width, tokens.height, tokens.coords.copy(), tensors)


@dataclass(frozen=True)
class MultiScaleParams:
    """Scales, relative saliency thresholds and cleanup settings for the
    two-round enhancement cascade.

    Thresholds are fractions of the running round's maximum saliency;
    absolute saliency scales with token density, so relative cuts keep the
    cascade portable across scenes. sigma_ball2 defaults to sigma_ball.
    """

    sigma_ball: float = 5.0
    sigma_stick1: float = 5.0
    sigma_stick2: float = 15.0
    sigma_ball2: float | None = None
    t_stick1: float = 0.05
    t_ball: float = 0.45
    t_stick2: float = 0.20
    t_stick3: float = 0.25
    n_angles: int = 180
    min_area: int = 40
    spur_iterations: int = 3
    connectivity: int = 8

    def __post_init__(self):
        for name in ("sigma_ball", "sigma_stick1", "sigma_stick2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.sigma_ball2 is not None and self.sigma_ball2 <= 0:
            raise ValueError("sigma_ball2 must be > 0")
        if not self.sigma_stick1 < self.sigma_stick2:
            raise ValueError("sigma_stick1 must be smaller than sigma_stick2")
        for name in ("t_stick1", "t_ball", "t_stick2", "t_stick3"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if not self.t_stick2 < self.t_stick3:
            raise ValueError("t_stick3 must exceed t_stick2")
        if self.n_angles < 8:
            raise ValueError("n_angles must be >= 8")

    def with_overrides(self, **kwargs) -> "MultiScaleParams":
        return replace(self, **kwargs)


def _saliency_map(tokens: TokenField, values: np.ndarray) -> np.ndarray:
    out = np.zeros((tokens.height, tokens.width))
    if len(tokens):
        out[tokens.coords[:, 1], tokens.coords[:, 0]] = np.maximum(values, 0.0)
    return out


def _relative_keep(values: np.ndarray, fraction: float) -> np.ndarray:
    if values.size == 0:
        return np.zeros(0, dtype=bool)
    return values >= fraction * values.max()


def multiscale_enhance(
    mask: np.ndarray,
    p: MultiScaleParams | None = None,
    debug: dict | None = None,
) -> np.ndarray:
    """Two-round multi-scale voting cascade over a binary mask.

    Round 1: foreground pixels are encoded as unit balls and vote at
    sigma_ball; tokens whose line saliency falls below t_stick1 of the round
    maximum are dropped (a deliberately conservative cut) and the point
    saliency mask at t_ball is stored for the final merge. The survivors then
    stick-vote at the small scale sigma_stick1 and are binarized at t_stick2.

    Round 2 re-encodes the survivors as balls and repeats ball + stick voting
    at the large scale sigma_stick2, binarizing at the stricter t_stick3.

    The final mask is the union of the round-2 stick mask and the stored ball
    mask, cleaned by small-component removal and spur pruning. Passing a dict
    as `debug` collects the per-round saliency rasters.
    """
    p = p or MultiScaleParams()
    mask = np.asarray(mask, dtype=bool)
    empty = np.zeros_like(mask)

    def note(name: str, value) -> None:
        if debug is not None:
            debug[name] = value

    tokens = TokenField.from_mask(mask)
    if len(tokens) == 0:
        return empty

    # round 1: ball voting seeds orientations and the point-saliency mask
    ball_field = build_ball_field(p.sigma_ball, p.n_angles)
    voted = sparse_vote(tokens, ball_field)
    stick_sal, ball_sal, _, _ = voted.saliency()
    note("round1_ball", SaliencyMaps(_saliency_map(voted, stick_sal), _saliency_map(voted, ball_sal)))
    keep = _relative_keep(stick_sal, p.t_stick1)
    ball_keep = keep & _relative_keep(ball_sal, p.t_ball)
    ball_mask = np.zeros_like(mask)
    ball_mask[voted.coords[ball_keep, 1], voted.coords[ball_keep, 0]] = True
    note("ball_mask", ball_mask)
    survivors = voted.select(keep)
    if len(survivors) == 0:
        merged = ball_mask
    else:
        # round 1: small-scale stick voting reinforces detail
        voted = sparse_vote(survivors, build_stick_field(p.sigma_stick1))
        stick_sal, ball_sal, _, _ = voted.saliency()
        note("round1_stick", SaliencyMaps(_saliency_map(voted, stick_sal), _saliency_map(voted, ball_sal)))
        round2 = voted.select(_relative_keep(stick_sal, p.t_stick2))
        if len(round2) == 0:
            merged = ball_mask
        else:
            # round 2: re-encode and vote at the large scale to kill noise
            sigma_ball2 = p.sigma_ball if p.sigma_ball2 is None else p.sigma_ball2
            tokens2 = TokenField.from_mask(round2.to_mask())
            ball_field2 = ball_field if sigma_ball2 == p.sigma_ball else build_ball_field(sigma_ball2, p.n_angles)
            voted = sparse_vote(tokens2, ball_field2)
            stick_sal, ball_sal, _, _ = voted.saliency()
            note("round2_ball", SaliencyMaps(_saliency_map(voted, stick_sal), _saliency_map(voted, ball_sal)))
            voted = sparse_vote(voted, build_stick_field(p.sigma_stick2))
            stick_sal, ball_sal, _, _ = voted.saliency()
            note("round2_stick", SaliencyMaps(_saliency_map(voted, stick_sal), _saliency_map(voted, ball_sal)))
            final = voted.select(_relative_keep(stick_sal, p.t_stick3))
            merged = final.to_mask() | ball_mask

    cleaned = remove_small_components(merged, p.min_area, p.connectivity)
    cleaned = binary_spur_prune(cleaned, p.spur_iterations)
    note("merged", merged)
    return cleaned
