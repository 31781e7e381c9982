"""Pure-Python fallback for the exact squared Euclidean distance transform.

Same two-pass lower-envelope algorithm as the compiled kernel in
``_edtcore``, with the arithmetic in identical order so that both backends
produce bit-identical results. The vertical pass is vectorised across
columns; the per-row envelope scan is a plain Python loop (this is the part
the compiled kernel accelerates).
"""

import math

import numpy as np

# Finite "no foreground" sentinel, mirrored in _edtcore.pyx.
INF_DIST = 1e15

# Squared values at or above this are "unreachable" and map to +inf.
SQ_UNREACHABLE = 1e29


def squared_edt(fg: np.ndarray) -> np.ndarray:
    """Squared distance to the nearest True pixel of a boolean mask."""
    h, w = fg.shape
    f = np.empty((h, w), dtype=np.float64)

    # Pass 1: per-column distance (in rows) to the nearest foreground pixel.
    run = np.full(w, INF_DIST)
    for y in range(h):
        run = np.where(fg[y], 0.0, run + 1.0)
        f[y] = run
    run = np.full(w, INF_DIST)
    for y in range(h - 1, -1, -1):
        run = np.where(fg[y], 0.0, run + 1.0)
        np.minimum(f[y], run, out=f[y])
    np.multiply(f, f, out=f)

    # Pass 2: exact 1-D squared distance transform of every row via the
    # lower envelope of parabolas rooted at (x, f[x]).
    out = np.empty((h, w), dtype=np.float64)
    v = [0] * w
    z = [0.0] * (w + 1)
    for y in range(h):
        frow = f[y].tolist()
        k = 0
        v[0] = 0
        z[0] = -math.inf
        z[1] = math.inf
        for q in range(1, w):
            fq = frow[q] + q * q
            vk = v[k]
            s = (fq - (frow[vk] + vk * vk)) / (2.0 * (q - vk))
            while s <= z[k]:
                k -= 1
                vk = v[k]
                s = (fq - (frow[vk] + vk * vk)) / (2.0 * (q - vk))
            k += 1
            v[k] = q
            z[k] = s
            z[k + 1] = math.inf
        k = 0
        res = [0.0] * w
        for q in range(w):
            while z[k + 1] < q:
                k += 1
            vk = v[k]
            res[q] = (q - vk) * (q - vk) + frow[vk]
        out[y] = res
    return out
