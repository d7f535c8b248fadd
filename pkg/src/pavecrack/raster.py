"""Grayscale raster model, PGM file I/O and integral-image machinery.

Conventions used throughout the package:

* a grayscale image is a 2-D float64 array with intensities in [0, 1],
  indexed ``img[y, x]``;
* a binary mask is a 2-D bool array of the same layout (True = foreground);
* intensities correspond to the 8-bit domain through ``v * 255``, and the
  integral image accumulates those de-normalized values in exact integer
  arithmetic so window sums are reproducible bit for bit.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "PgmError",
    "PgmHeaderError",
    "PgmMaxvalError",
    "PgmDataError",
    "load_pgm",
    "load_mask",
    "save_pgm",
    "invert",
    "IntegralImage",
    "build_integral",
    "window_mean",
    "window_mean_map",
]


class PgmError(ValueError):
    """Base error for unreadable or unsupported PGM files."""


class PgmHeaderError(PgmError):
    """Malformed or truncated PGM header."""


class PgmMaxvalError(PgmError):
    """Sample depth outside the supported 8-bit range."""


class PgmDataError(PgmError):
    """Pixel payload truncated, non-numeric or out of range."""


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read `count` whitespace-delimited header tokens, skipping '#' comments.

    Returns the tokens and the offset just past the single whitespace byte
    that terminates the last token (the start of the pixel payload).
    """
    tokens: list[bytes] = []
    i, n = 0, len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i] == ord("#"):
            while i < n and data[i] not in (0x0A, 0x0D):
                i += 1
            continue
        if i >= n:
            raise PgmHeaderError("truncated PGM header")
        start = i
        while i < n and not data[i : i + 1].isspace() and data[i] != ord("#"):
            i += 1
        tokens.append(data[start:i])
    if i >= n or not data[i : i + 1].isspace():
        raise PgmHeaderError("missing separator after PGM header")
    return tokens, i + 1


def load_pgm(path: str | Path) -> np.ndarray:
    """Load a binary (P5) or ASCII (P2) PGM file as a [0, 1] grayscale image.

    Only 8-bit files (maxval <= 255) are supported; sample values map to
    ``v / 255``. Raises PgmHeaderError / PgmMaxvalError / PgmDataError for
    the corresponding defects.
    """
    data = Path(path).read_bytes()
    (magic, w_tok, h_tok, max_tok), offset = _header_tokens(data, 4)
    if magic not in (b"P2", b"P5"):
        raise PgmHeaderError(f"unsupported PNM magic {magic!r} (expected P2 or P5)")
    try:
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except ValueError as exc:
        raise PgmHeaderError(f"non-numeric PGM header field: {exc}") from exc
    if width < 1 or height < 1:
        raise PgmHeaderError(f"bad PGM dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise PgmMaxvalError(f"maxval {maxval} outside supported range 1..255")

    npix = width * height
    if magic == b"P5":
        body = data[offset : offset + npix]
        if len(body) < npix:
            raise PgmDataError(f"truncated pixel data: expected {npix} bytes, got {len(body)}")
        values = np.frombuffer(body, dtype=np.uint8).astype(np.float64)
    else:
        text = re.sub(rb"#[^\n]*", b"", data[offset:])
        fields = text.split()
        if len(fields) < npix:
            raise PgmDataError(f"truncated pixel data: expected {npix} samples, got {len(fields)}")
        try:
            values = np.array([int(f) for f in fields[:npix]], dtype=np.float64)
        except ValueError as exc:
            raise PgmDataError(f"non-numeric P2 sample: {exc}") from exc
    if values.max() > maxval:
        raise PgmDataError(f"sample value {int(values.max())} exceeds maxval {maxval}")
    return (values / 255.0).reshape(height, width)


def load_mask(path: str | Path, threshold: float = 0.5) -> np.ndarray:
    """Load a PGM file as a binary mask (intensity > threshold = foreground)."""
    return load_pgm(path) > threshold


def save_pgm(img: np.ndarray, path: str | Path) -> None:
    """Write an image or mask as binary PGM (P5, maxval 255).

    Grayscale intensities are written as ``round(v * 255)``; bool masks as
    0/255. Output is canonical, so save -> load -> save is byte-identical.
    """
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {arr.shape}")
    if arr.dtype == bool:
        payload = np.where(arr, 255, 0).astype(np.uint8)
    else:
        payload = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    height, width = payload.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + payload.tobytes())


def invert(img: np.ndarray) -> np.ndarray:
    """Gray inversion: every intensity v becomes 1 - v."""
    return 1.0 - np.asarray(img, dtype=np.float64)


@dataclass(frozen=True)
class IntegralImage:
    """Summed-area table over the de-normalized 8-bit domain.

    ``sums`` is zero-padded: row 0 and column 0 are zero and
    ``sums[y + 1, x + 1]`` is the exact integer sum of ``round(v * 255)``
    over all pixels (i, j) with i <= x and j <= y. The padding makes every
    rectangle sum exactly four table lookups regardless of window size.
    """

    width: int
    height: int
    sums: np.ndarray


def build_integral(img: np.ndarray) -> IntegralImage:
    """Build the integral image of a [0, 1] grayscale raster."""
    q = np.rint(np.asarray(img, dtype=np.float64) * 255.0).astype(np.int64)
    height, width = q.shape
    sums = np.zeros((height + 1, width + 1), dtype=np.int64)
    sums[1:, 1:] = q.cumsum(axis=0).cumsum(axis=1)
    return IntegralImage(width=width, height=height, sums=sums)


def _check_window(w: int) -> int:
    if w < 3 or w % 2 == 0:
        raise ValueError(f"window size must be odd and >= 3, got {w}")
    return w // 2


def window_mean(ii: IntegralImage, x: int, y: int, w: int) -> float:
    """Mean intensity of the w x w window centered at (x, y).

    Windows are clipped at the image border and the in-bounds pixel count is
    used as the divisor. Costs exactly four table lookups for any w.
    """
    c = _check_window(w)
    if not (0 <= x < ii.width and 0 <= y < ii.height):
        raise ValueError(f"window center ({x}, {y}) outside {ii.width}x{ii.height} image")
    x0, x1 = max(0, x - c), min(ii.width - 1, x + c)
    y0, y1 = max(0, y - c), min(ii.height - 1, y + c)
    s = ii.sums
    total = s[y1 + 1, x1 + 1] - s[y0, x1 + 1] - s[y1 + 1, x0] + s[y0, x0]
    count = (x1 - x0 + 1) * (y1 - y0 + 1)
    return float(total) / (count * 255.0)


def window_mean_map(ii: IntegralImage, w: int) -> np.ndarray:
    """Per-pixel w x w window means for the whole image (clipped at borders).

    Vectorized equivalent of calling window_mean at every pixel; cost is
    independent of w.
    """
    c = _check_window(w)
    xs = np.arange(ii.width)
    ys = np.arange(ii.height)
    x0 = np.maximum(xs - c, 0)
    x1 = np.minimum(xs + c, ii.width - 1)
    y0 = np.maximum(ys - c, 0)
    y1 = np.minimum(ys + c, ii.height - 1)
    s = np.asarray(ii.sums)
    total = (
        s[np.ix_(y1 + 1, x1 + 1)]
        - s[np.ix_(y0, x1 + 1)]
        - s[np.ix_(y1 + 1, x0)]
        + s[np.ix_(y0, x0)]
    )
    counts = np.outer(y1 - y0 + 1, x1 - x0 + 1)
    return total / (counts * 255.0)
