"""Binary PGM ("P5", 8-bit, maxval 255) reader and writer.

Frames and masks travel between tools as PGM files; masks use the
convention value >= 128 -> foreground. Write followed by read is bit-exact.
"""

from __future__ import annotations

import os
from typing import Union

import numpy as np

PathLike = Union[str, os.PathLike]


def read_pgm(path: PathLike) -> np.ndarray:
    """Read a binary PGM file into a uint8 (height, width) array."""
    with open(path, "rb") as fh:
        data = fh.read()

    pos = 0

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(data):
            c = data[pos : pos + 1]
            if c == b"#":
                eol = data.find(b"\n", pos)
                pos = len(data) if eol < 0 else eol + 1
            elif c.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        return data[start:pos]

    magic = next_token()
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {magic!r})")
    width = int(next_token())
    height = int(next_token())
    maxval = int(next_token())
    if width < 1 or height < 1:
        raise ValueError(f"{path}: invalid dimensions {width}x{height}")
    if maxval != 255:
        raise ValueError(f"{path}: unsupported maxval {maxval} (want 255)")
    pos += 1  # single whitespace byte separates header from raster
    raster = data[pos : pos + width * height]
    if len(raster) != width * height:
        raise ValueError(f"{path}: raster truncated")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path: PathLike, img: np.ndarray) -> None:
    """Write a 2-D array as binary PGM; values are clipped to 0..255."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"PGM image must be 2-D, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(arr.tobytes())


def mask_to_gray(mask: np.ndarray) -> np.ndarray:
    """Encode a boolean mask for PGM storage (foreground -> 255)."""
    return np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)


def gray_to_mask(img: np.ndarray) -> np.ndarray:
    """Decode a PGM-stored mask (value >= 128 -> foreground)."""
    return np.asarray(img) >= 128
