# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled lattice-scan kernels.

Numerics mirror _pykern.py exactly: matrix-vector products accumulate in
ascending column order and fractional parts clamp the same way, so compiled
and fallback outputs agree bit for bit.  Keep the two files in sync.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, sqrt

cnp.import_array()

BACKEND = "cython"

cdef double _FRAC_CLAMP = 1e-12


def step_scan(const double[:, ::1] L, const cnp.int64_t[:, ::1] pts, const double[::1] offset, double tol):
    """One quantized-map step for every point; see _pykern.step_scan."""
    cdef Py_ssize_t m = pts.shape[0]
    cdef Py_ssize_t n = pts.shape[1]
    out_arr = np.empty((m, n), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    cdef Py_ssize_t row, i, k
    cdef double acc, v, f, d
    cdef long flags = 0
    cdef bint grazed
    for row in range(m):
        grazed = False
        for i in range(n):
            acc = 0.0
            for k in range(n):
                acc = acc + (<double> pts[row, k]) * L[i, k]
            v = acc - offset[i]
            f = floor(v)
            if acc < f + offset[i]:
                f = f - 1.0
            elif acc >= (f + 1.0) + offset[i]:
                f = f + 1.0
            d = v - f
            if d < tol or d > 1.0 - tol:
                grazed = True
            out[row, i] = <cnp.int64_t> f
        if grazed:
            flags += 1
    return out_arr, flags


def orbit_errors(const double[:, ::1] L, const cnp.int64_t[:, ::1] pts, Py_ssize_t nsteps,
                 const double[::1] offset, double tol):
    """Per-step quantization errors along an orbit; see _pykern.orbit_errors."""
    cdef Py_ssize_t m = pts.shape[0]
    cdef Py_ssize_t n = pts.shape[1]
    errors_arr = np.empty((m, nsteps, n), dtype=np.float64)
    cdef double[:, :, ::1] errors = errors_arr
    cdef cnp.int64_t[::1] x = np.empty(n, dtype=np.int64)
    cdef double[::1] u = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t row, s, i, k
    cdef double acc, v, f, d
    cdef long flags = 0
    cdef cnp.int64_t y
    cdef bint grazed
    for row in range(m):
        for i in range(n):
            x[i] = pts[row, i]
        for s in range(nsteps):
            grazed = False
            for i in range(n):
                acc = 0.0
                for k in range(n):
                    acc = acc + (<double> x[k]) * L[i, k]
                u[i] = acc
            for i in range(n):
                v = u[i] - offset[i]
                f = floor(v)
                if u[i] < f + offset[i]:
                    f = f - 1.0
                elif u[i] >= (f + 1.0) + offset[i]:
                    f = f + 1.0
                d = v - f
                if d < tol or d > 1.0 - tol:
                    grazed = True
                y = <cnp.int64_t> f
                errors[row, s, i] = u[i] - (<double> y)
                u[i] = <double> y     # reuse u to stage the integer image
            for i in range(n):
                x[i] = <cnp.int64_t> u[i]
            if grazed:
                flags += 1
    return errors_arr, flags


def orbit_deviations(const double[:, ::1] L, const cnp.int64_t[:, ::1] pts, Py_ssize_t nsteps,
                     const double[::1] offset, const double[::1] mu, const double[:, :, ::1] blocks,
                     double tol):
    """Deviation recurrence along an orbit; see _pykern.orbit_deviations."""
    cdef Py_ssize_t m = pts.shape[0]
    cdef Py_ssize_t n = pts.shape[1]
    cdef Py_ssize_t r = blocks.shape[0]
    delta_arr = np.zeros((m, n), dtype=np.float64)
    blockmax_arr = np.zeros((m, r), dtype=np.float64)
    cdef double[:, ::1] delta = delta_arr
    cdef double[:, ::1] blockmax = blockmax_arr
    cdef cnp.int64_t[::1] x = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] y = np.empty(n, dtype=np.int64)
    cdef double[::1] u = np.empty(n, dtype=np.float64)
    cdef double[::1] err = np.empty(n, dtype=np.float64)
    cdef double[::1] dcur = np.empty(n, dtype=np.float64)
    cdef double[::1] dnew = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t row, s, i, k, j
    cdef double acc, v, f, d, b0, b1, val
    cdef long flags = 0
    cdef bint grazed
    for row in range(m):
        for i in range(n):
            x[i] = pts[row, i]
            dcur[i] = 0.0
        for s in range(nsteps):
            grazed = False
            for i in range(n):
                acc = 0.0
                for k in range(n):
                    acc = acc + (<double> x[k]) * L[i, k]
                u[i] = acc
            for i in range(n):
                v = u[i] - offset[i]
                f = floor(v)
                if u[i] < f + offset[i]:
                    f = f - 1.0
                elif u[i] >= (f + 1.0) + offset[i]:
                    f = f + 1.0
                d = v - f
                if d < tol or d > 1.0 - tol:
                    grazed = True
                y[i] = <cnp.int64_t> f
                err[i] = u[i] - (<double> y[i])
            for i in range(n):
                x[i] = y[i]
            if grazed:
                flags += 1
            for i in range(n):
                acc = 0.0
                for k in range(n):
                    acc = acc + dcur[k] * L[i, k]
                dnew[i] = (acc + err[i]) - mu[i]
            for i in range(n):
                dcur[i] = dnew[i]
            for j in range(r):
                b0 = 0.0
                b1 = 0.0
                for k in range(n):
                    b0 = b0 + blocks[j, 0, k] * dcur[k]
                    b1 = b1 + blocks[j, 1, k] * dcur[k]
                val = sqrt(b0 * b0 + b1 * b1)
                if val > blockmax[row, j]:
                    blockmax[row, j] = val
        for i in range(n):
            delta[row, i] = dcur[i]
    return delta_arr, blockmax_arr, flags


def frac_box_count(const double[:, ::1] Lam, const cnp.int64_t[::1] corner, const cnp.int64_t[::1] edges,
                   const double[:, ::1] los, const double[:, ::1] his):
    """Count fragment points whose fractional image lies in a box union."""
    cdef Py_ssize_t m = Lam.shape[0]
    cdef Py_ssize_t n = Lam.shape[1]
    cdef Py_ssize_t nb = los.shape[0]
    cdef cnp.int64_t[::1] x = np.empty(n, dtype=np.int64)
    cdef double[::1] w = np.empty(m, dtype=np.float64)
    cdef Py_ssize_t i, k, b
    cdef double acc, ww
    cdef long hits = 0
    cdef bint inside, boxhit, done
    for i in range(n):
        x[i] = corner[i]
    done = False
    while not done:
        for i in range(m):
            acc = 0.0
            for k in range(n):
                acc = acc + (<double> x[k]) * Lam[i, k]
            ww = acc - floor(acc)
            if ww > 1.0 - _FRAC_CLAMP:
                ww = 0.0
            w[i] = ww
        inside = False
        for b in range(nb):
            boxhit = True
            for i in range(m):
                if w[i] < los[b, i] or w[i] >= his[b, i]:
                    boxhit = False
                    break
            if boxhit:
                inside = True
                break
        if inside:
            hits += 1
        # lexicographic odometer, last coordinate fastest
        k = n - 1
        while True:
            x[k] += 1
            if x[k] < corner[k] + edges[k]:
                break
            x[k] = corner[k]
            if k == 0:
                done = True
                break
            k -= 1
    return hits
