# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel for the exact squared Euclidean distance transform.

Two-pass lower-envelope algorithm: a vertical scan reduces the 2-D problem to
per-row 1-D transforms, which are then solved exactly with a parabola
envelope. The arithmetic mirrors `_edt_py.squared_edt` operation for
operation so the two backends return bit-identical fields.

Compiled without -ffast-math on purpose: the envelope breakpoints use IEEE
infinities as sentinels.
"""

from libc.math cimport INFINITY
from libc.stdlib cimport free, malloc

import numpy as np

# Finite "no foreground" sentinel; keeps parabola intersections free of
# inf - inf = nan while still dwarfing any real squared distance.
cdef double INF_DIST = 1e15


def squared_edt(const unsigned char[:, ::1] fg):
    """Squared distance to the nearest nonzero pixel of ``fg`` (row-major).

    Cells with no reachable foreground hold values >= INF_DIST**2 / 2 and are
    mapped to +inf by the caller.
    """
    cdef Py_ssize_t h = fg.shape[0]
    cdef Py_ssize_t w = fg.shape[1]
    out_np = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_np
    cdef double[:, ::1] f = np.empty((h, w), dtype=np.float64)

    cdef double *run = <double *> malloc(w * sizeof(double))
    cdef Py_ssize_t *v = <Py_ssize_t *> malloc(w * sizeof(Py_ssize_t))
    cdef double *z = <double *> malloc((w + 1) * sizeof(double))
    if run == NULL or v == NULL or z == NULL:
        free(run)
        free(v)
        free(z)
        raise MemoryError()

    cdef Py_ssize_t x, y, q, k, vk
    cdef double s, fq

    with nogil:
        # Pass 1: per-column distance (in rows) to the nearest foreground
        # pixel, via a down scan and an up scan; squared afterwards.
        for x in range(w):
            run[x] = INF_DIST
        for y in range(h):
            for x in range(w):
                if fg[y, x]:
                    run[x] = 0.0
                else:
                    run[x] = run[x] + 1.0
                f[y, x] = run[x]
        for x in range(w):
            run[x] = INF_DIST
        for y in range(h - 1, -1, -1):
            for x in range(w):
                if fg[y, x]:
                    run[x] = 0.0
                else:
                    run[x] = run[x] + 1.0
                if run[x] < f[y, x]:
                    f[y, x] = run[x]
        for y in range(h):
            for x in range(w):
                f[y, x] = f[y, x] * f[y, x]

        # Pass 2: exact 1-D squared distance transform of every row.
        for y in range(h):
            k = 0
            v[0] = 0
            z[0] = -INFINITY
            z[1] = INFINITY
            for q in range(1, w):
                fq = f[y, q] + <double> (q * q)
                vk = v[k]
                s = (fq - (f[y, vk] + <double> (vk * vk))) / (2.0 * <double> (q - vk))
                while s <= z[k]:
                    k -= 1
                    vk = v[k]
                    s = (fq - (f[y, vk] + <double> (vk * vk))) / (2.0 * <double> (q - vk))
                k += 1
                v[k] = q
                z[k] = s
                z[k + 1] = INFINITY
            k = 0
            for q in range(w):
                while z[k + 1] < q:
                    k += 1
                vk = v[k]
                out[y, q] = <double> ((q - vk) * (q - vk)) + f[y, vk]

    free(run)
    free(v)
    free(z)
    return out_np
