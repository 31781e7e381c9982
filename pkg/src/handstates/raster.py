"""Deterministic image primitives used by the feature pipeline.

Conventions: a frame ("raster") is a 2-D float64 array of intensities in
row-major (height, width) layout; a mask is a 2-D bool array of the same
shape; a distance field is float64 with +inf meaning "no foreground
anywhere". Coordinates are pixel centers, x = column and y = row.

All functions here are pure and safe to call from any number of workers.
"""

from __future__ import annotations

import os
from typing import NamedTuple, Optional

import numpy as np

from . import _edt_py

try:
    from . import _edtcore
except ImportError:
    _edtcore = None


class Point2(NamedTuple):
    """Sub-pixel image coordinate (x = column, y = row)."""

    x: float
    y: float


# Rec. 601 luma weights for collapsing colour sources to intensity.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def rgb_to_gray(img: np.ndarray) -> np.ndarray:
    """Collapse an (h, w, 3) colour array to single-channel intensity."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (h, w) or (h, w, 3) array, got {img.shape}")
    r, g, b = LUMA_WEIGHTS
    return r * img[:, :, 0] + g * img[:, :, 1] + b * img[:, :, 2]


def laplacian_variance(img: np.ndarray) -> float:
    """Population variance of the 4-neighbour Laplacian at interior pixels.

    Kernel is (0,1,0 / 1,-4,1 / 0,1,0) evaluated without padding, so images
    narrower than 3 pixels in either dimension have no interior and are
    rejected.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    if h < 3 or w < 3:
        raise ValueError("image too small for Laplacian (needs at least 3x3)")
    lap = (
        img[:-2, 1:-1]
        + img[2:, 1:-1]
        + img[1:-1, :-2]
        + img[1:-1, 2:]
        - 4.0 * img[1:-1, 1:-1]
    )
    return float(np.var(lap))


def frame_diff_energy(a: np.ndarray, b: np.ndarray) -> float:
    """Mean squared per-pixel intensity difference between two frames."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"frame dimension mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.mean(d * d))


def _as_mask(mask: np.ndarray) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
    return mask.astype(bool, copy=False)


def edt_backend() -> str:
    """Name of the distance-transform backend selected at import time."""
    if _edtcore is None or os.environ.get("HANDSTATES_PURE", "0") not in ("", "0"):
        return "pure"
    return "compiled"


def squared_edt(mask: np.ndarray, backend: Optional[str] = None) -> np.ndarray:
    """Exact squared EDT of a boolean mask; ``backend`` overrides selection."""
    fg = _as_mask(mask)
    if backend is None:
        backend = edt_backend()
    if backend == "compiled":
        if _edtcore is None:
            raise RuntimeError("compiled distance-transform kernel unavailable")
        return _edtcore.squared_edt(np.ascontiguousarray(fg, dtype=np.uint8))
    if backend == "pure":
        return _edt_py.squared_edt(fg)
    raise ValueError(f"unknown backend {backend!r}")


def euclidean_distance_transform(
    mask: np.ndarray, backend: Optional[str] = None
) -> np.ndarray:
    """Exact per-pixel distance to the nearest foreground pixel of ``mask``.

    Distances are pixel-center to pixel-center; an all-background mask
    yields +inf everywhere so callers can treat "object absent" uniformly.
    """
    sq = squared_edt(mask, backend=backend)
    out = np.sqrt(sq)
    out[sq >= _edt_py.SQ_UNREACHABLE] = np.inf
    return out


def mask_centroid(mask: np.ndarray) -> Point2:
    """Arithmetic mean of foreground pixel coordinates."""
    fg = _as_mask(mask)
    ys, xs = np.nonzero(fg)
    if xs.size == 0:
        raise ValueError("empty mask has no centroid")
    return Point2(float(xs.mean()), float(ys.mean()))


def min_distance_in_mask(field: np.ndarray, sample_mask: np.ndarray) -> float:
    """Minimum of a distance field over the foreground of ``sample_mask``."""
    field = np.asarray(field, dtype=np.float64)
    fg = _as_mask(sample_mask)
    if field.shape != fg.shape:
        raise ValueError(
            f"field/mask dimension mismatch: {field.shape} vs {fg.shape}"
        )
    if not fg.any():
        raise ValueError("empty mask: nothing to sample")
    return float(field[fg].min())


def image_diagonal(shape: tuple[int, int]) -> float:
    """Length of the image diagonal, the finite stand-in for +inf distances."""
    h, w = shape
    return float(np.hypot(w, h))
