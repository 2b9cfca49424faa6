# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel backend.

Twin of ``sdirand._kernels.pure``; see that module for the contract.
Trigonometric tables for the grid scan are built with NumPy so that
both lanes consume bitwise-identical inputs, and float groupings match
the pure lane expression for expression.
"""

import math

import numpy as np

from libc.math cimport cos, fabs, sin

NAME = "cython"

# Widening applied to subtree windows before pruning; keeps float
# reassociation from discarding admissible combinations.
cdef double PRUNE_MARGIN = 1e-9

cdef double ROW_C0[4]
cdef double ROW_C1[4]
ROW_C0[0] = 1.0; ROW_C0[1] = 1.0; ROW_C0[2] = -1.0; ROW_C0[3] = -1.0
ROW_C1[0] = 1.0; ROW_C1[1] = -1.0; ROW_C1[2] = 1.0; ROW_C1[3] = -1.0


cdef inline double dmax(double a, double b) noexcept nogil:
    return a if a >= b else b


cdef inline void _eval_row(const double* x, double* t_out, double* p_out) noexcept nogil:
    cdef double stm = sin(x[8])
    cdef double ctm = cos(x[8])
    cdef double em = x[9]
    cdef double t = 0.0
    cdef double amax = 0.0
    cdef double x0, x1, e0, e1, m
    cdef int a
    for a in range(4):
        x0 = cos(x[2 * a])
        x1 = (sin(x[2 * a]) * stm) * cos(x[2 * a + 1] - em) + (x0 * ctm)
        e0 = 0.5 * (1.0 + x0)
        e1 = 0.5 * (1.0 + x1)
        t += ROW_C0[a] * e0 + ROW_C1[a] * e1
        m = dmax(fabs(x0), fabs(x1))
        if m > amax:
            amax = m
    t_out[0] = t
    m = 0.5 * (1.0 + amax)
    p_out[0] = m if m < 1.0 else 1.0


def eval_one(params):
    """Witness value and guessing probability of one parameter vector."""
    arr = np.ascontiguousarray(params, dtype=np.float64)
    if arr.shape != (10,):
        raise ValueError(f"expected 10 parameters, got shape {arr.shape}")
    cdef double[::1] x = arr
    cdef double t, p
    _eval_row(&x[0], &t, &p)
    return float(t), float(p)


def eval_batch(params):
    """Vectorized :func:`eval_one` over an (n, 10) parameter array."""
    arr = np.ascontiguousarray(params, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 10:
        raise ValueError(f"expected shape (n, 10), got {arr.shape}")
    cdef double[:, ::1] x = arr
    cdef Py_ssize_t n = x.shape[0]
    t_arr = np.empty(n)
    p_arr = np.empty(n)
    cdef double[::1] tv = t_arr
    cdef double[::1] pv = p_arr
    cdef Py_ssize_t i
    for i in range(n):
        _eval_row(&x[i, 0], &tv[i], &pv[i])
    return t_arr, p_arr


def oracle_search(double t_target, int resolution, double band, bint free_y0=False):
    """Exhaustive angle-grid scan; same contract as the pure twin."""
    cdef int res = resolution
    if res < 2:
        raise ValueError(f"resolution must be at least 2, got {resolution}")
    cdef int P = res * res

    th_grid = np.linspace(0.0, math.pi, res)
    et_grid = np.linspace(0.0, 2.0 * math.pi, res, endpoint=False)
    st_np = np.sin(th_grid)
    ct_np = np.cos(th_grid)
    cdif_np = np.ascontiguousarray(np.cos(et_grid[:, None] - et_grid[None, :]))
    st_p_np = np.repeat(st_np, res)
    ct_p_np = np.repeat(ct_np, res)

    cdef double[::1] st = st_np
    cdef double[::1] ct = ct_np
    cdef double[:, ::1] cdif = cdif_np
    cdef double[::1] st_p = st_p_np
    cdef double[::1] ct_p = ct_p_np

    x0_np = np.empty(P)
    e0_np = np.empty(P)
    w0_np = np.empty(P)
    w1_np = np.empty(P)
    g_np = np.empty(P)
    cdef double[::1] x0 = x0_np
    cdef double[::1] e0 = e0_np
    cdef double[::1] w0 = w0_np
    cdef double[::1] w1 = w1_np
    cdef double[::1] g = g_np

    cdef double lo = t_target - band
    cdef double hi = t_target + band
    cdef double best = -1.0
    cdef bint found = False
    cdef bint done = False
    cdef int bm0 = -1, bm1 = -1, b0 = -1, b1 = -1, b2 = -1, b3 = -1

    cdef int n_m0 = P if free_y0 else 1
    cdef int m0, m1, i0, i1, i2, i3, k, m0t, m0e, m1t, m1e
    cdef double stm0, ctm0, stm1, ctm1, x1k, e1k, gk, gmax
    cdef double w0mx, w0mn, w1mx, w1mn, rest_max, rest_min
    cdef double s0, s01, s012, w, w2mx, w2mn, w3mx, w3mn, g01, g012, gc

    for m0 in range(n_m0):
        m0t = m0 // res
        m0e = m0 % res
        stm0 = st[m0t]
        ctm0 = ct[m0t]
        for k in range(P):
            x0[k] = (st_p[k] * stm0) * cdif[k % res, m0e] + (ct_p[k] * ctm0)
            e0[k] = 0.5 * (1.0 + x0[k])
        for m1 in range(P):
            m1t = m1 // res
            m1e = m1 % res
            stm1 = st[m1t]
            ctm1 = ct[m1t]
            gmax = -1.0
            w0mx = -1e300
            w0mn = 1e300
            w1mx = -1e300
            w1mn = 1e300
            for k in range(P):
                x1k = (st_p[k] * stm1) * cdif[k % res, m1e] + (ct_p[k] * ctm1)
                e1k = 0.5 * (1.0 + x1k)
                w0[k] = e0[k] + e1k
                w1[k] = e0[k] - e1k
                gk = 0.5 * (1.0 + dmax(fabs(x0[k]), fabs(x1k)))
                if gk > 1.0:
                    gk = 1.0
                g[k] = gk
                if gk > gmax:
                    gmax = gk
                if w0[k] > w0mx:
                    w0mx = w0[k]
                if w0[k] < w0mn:
                    w0mn = w0[k]
                if w1[k] > w1mx:
                    w1mx = w1[k]
                if w1[k] < w1mn:
                    w1mn = w1[k]
            if found and gmax <= best:
                continue
            # w2 = -w1 and w3 = -w0 exactly, so their extrema flip sign.
            w2mx = -w1mn
            w2mn = -w1mx
            w3mx = -w0mn
            w3mn = -w0mx
            rest_max = w1mx + (w2mx + w3mx)
            rest_min = w1mn + (w2mn + w3mn)
            if w0mx + rest_max < lo - PRUNE_MARGIN:
                continue
            if w0mn + rest_min > hi + PRUNE_MARGIN:
                continue
            for i0 in range(P):
                s0 = w0[i0]
                if s0 + rest_max < lo - PRUNE_MARGIN or s0 + rest_min > hi + PRUNE_MARGIN:
                    continue
                for i1 in range(P):
                    s01 = s0 + w1[i1]
                    if s01 + (w2mx + w3mx) < lo - PRUNE_MARGIN:
                        continue
                    if s01 + (w2mn + w3mn) > hi + PRUNE_MARGIN:
                        continue
                    g01 = dmax(g[i0], g[i1])
                    for i2 in range(P):
                        s012 = s01 - w1[i2]
                        if s012 + w3mx < lo - PRUNE_MARGIN or s012 + w3mn > hi + PRUNE_MARGIN:
                            continue
                        g012 = dmax(g01, g[i2])
                        if found and dmax(g012, gmax) <= best:
                            continue
                        for i3 in range(P):
                            w = s012 - w0[i3]
                            if fabs(w - t_target) <= band:
                                found = True
                                gc = dmax(g012, g[i3])
                                if gc > best:
                                    best = gc
                                    bm0 = m0
                                    bm1 = m1
                                    b0 = i0
                                    b1 = i1
                                    b2 = i2
                                    b3 = i3
                                    if best == 1.0:
                                        done = True
                                        break
                        if done:
                            break
                    if done:
                        break
                if done:
                    break
            if done:
                break
        if done:
            break

    if not found:
        return False, -1.0, None
    out = np.empty(12)
    combo = (b0, b1, b2, b3)
    for k in range(4):
        out[2 * k] = th_grid[combo[k] // res]
        out[2 * k + 1] = et_grid[combo[k] % res]
    out[8] = th_grid[bm1 // res]
    out[9] = et_grid[bm1 % res]
    out[10] = th_grid[bm0 // res]
    out[11] = et_grid[bm0 % res]
    return True, float(best), out
