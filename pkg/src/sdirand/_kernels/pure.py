"""Pure-NumPy kernel backend.

Twin of the compiled backend in ``sdirand._kernels._fast``.  Both lanes
share raw trigonometric tables built with NumPy and keep identical
floating-point groupings, so results agree to the last few ulp; tests
hold them to 1e-12.

Parameter vectors have 10 entries: Bloch angles ``(theta, eta)`` for
the four preparations in label order, then for the second measurement.
The first measurement is the computational basis.
"""

from __future__ import annotations

import math

import numpy as np

NAME = "pure"

_ROW_SIGNS_Y0 = np.array([1.0, 1.0, -1.0, -1.0])
_ROW_SIGNS_Y1 = np.array([1.0, -1.0, 1.0, -1.0])
_ROW_SIGNS_Y0.setflags(write=False)
_ROW_SIGNS_Y1.setflags(write=False)

# Subtree windows are widened by this much before pruning so that float
# reassociation can never discard an admissible grid combination.
_PRUNE_MARGIN = 1e-9

# Cap on i1-block element count in the exhaustive scan (memory guard).
_BLOCK_ELEMS = 2_000_000


def eval_one(params) -> tuple[float, float]:
    """Witness value and guessing probability of one parameter vector."""
    x = np.ascontiguousarray(params, dtype=float)
    if x.shape != (10,):
        raise ValueError(f"expected 10 parameters, got shape {x.shape}")
    stm = math.sin(x[8])
    ctm = math.cos(x[8])
    em = x[9]
    t = 0.0
    amax = 0.0
    for a in range(4):
        x0 = math.cos(x[2 * a])
        x1 = (math.sin(x[2 * a]) * stm) * math.cos(x[2 * a + 1] - em) + (x0 * ctm)
        e0 = 0.5 * (1.0 + x0)
        e1 = 0.5 * (1.0 + x1)
        t += _ROW_SIGNS_Y0[a] * e0 + _ROW_SIGNS_Y1[a] * e1
        m = max(abs(x0), abs(x1))
        if m > amax:
            amax = m
    return float(t), float(min(0.5 * (1.0 + amax), 1.0))


def eval_batch(params) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`eval_one` over an (n, 10) parameter array."""
    arr = np.ascontiguousarray(params, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 10:
        raise ValueError(f"expected shape (n, 10), got {arr.shape}")
    th = arr[:, 0:8:2]
    et = arr[:, 1:8:2]
    tm = arr[:, 8:9]
    em = arr[:, 9:10]
    x0 = np.cos(th)
    x1 = (np.sin(th) * np.sin(tm)) * np.cos(et - em) + (x0 * np.cos(tm))
    e0 = 0.5 * (1.0 + x0)
    e1 = 0.5 * (1.0 + x1)
    rows = _ROW_SIGNS_Y0 * e0 + _ROW_SIGNS_Y1 * e1
    t = ((rows[:, 0] + rows[:, 1]) + rows[:, 2]) + rows[:, 3]
    amax = np.maximum(np.abs(x0), np.abs(x1)).max(axis=1)
    p = np.minimum(0.5 * (1.0 + amax), 1.0)
    return t, p


def _params_from_combo(th_grid, et_grid, res, combo) -> np.ndarray:
    m0, m1, i0, i1, i2, i3 = combo
    out = np.empty(12)
    for slot, k in enumerate((i0, i1, i2, i3)):
        out[2 * slot] = th_grid[k // res]
        out[2 * slot + 1] = et_grid[k % res]
    out[8] = th_grid[m1 // res]
    out[9] = et_grid[m1 % res]
    out[10] = th_grid[m0 // res]
    out[11] = et_grid[m0 % res]
    return out


def oracle_search(
    t_target: float, resolution: int, band: float, free_y0: bool = False
) -> tuple[bool, float, np.ndarray | None]:
    """Exhaustive angle-grid scan for the best guessing probability.

    Admits every grid device whose witness value lies within ``band``
    of ``t_target`` and maximizes the guessing probability over them.
    ``theta`` runs over ``linspace(0, pi, resolution)`` inclusive,
    ``eta`` over ``linspace(0, 2*pi, resolution)`` without endpoint.
    With ``free_y0`` the first measurement is gridded too instead of
    staying pinned to the computational basis.

    Returns
    -------
    (found, best_p, params)
        ``found`` is False when no grid device falls in the band; then
        ``best_p`` is -1 and ``params`` is None.  Otherwise ``params``
        has 12 entries: the 10-entry vector followed by the first
        measurement's angles (zeros unless ``free_y0``).
    """
    res = int(resolution)
    if res < 2:
        raise ValueError(f"resolution must be at least 2, got {resolution}")
    P = res * res
    th_grid = np.linspace(0.0, math.pi, res)
    et_grid = np.linspace(0.0, 2.0 * math.pi, res, endpoint=False)
    st = np.sin(th_grid)
    ct = np.cos(th_grid)
    cdif = np.cos(et_grid[:, None] - et_grid[None, :])
    st_p = np.repeat(st, res)
    ct_p = np.repeat(ct, res)
    ke = np.tile(np.arange(res), res)

    lo = t_target - band
    hi = t_target + band
    block = max(1, _BLOCK_ELEMS // (P * P))

    best = -1.0
    found = False
    best_combo = None

    for m0 in range(P) if free_y0 else (0,):
        m0t, m0e = divmod(m0, res)
        x0 = (st_p * st[m0t]) * cdif[ke, m0e] + (ct_p * ct[m0t])
        e0 = 0.5 * (1.0 + x0)
        for m1 in range(P):
            m1t, m1e = divmod(m1, res)
            x1 = (st_p * st[m1t]) * cdif[ke, m1e] + (ct_p * ct[m1t])
            e1 = 0.5 * (1.0 + x1)
            w0 = e0 + e1
            w1 = e0 - e1
            w2 = -w1
            w3 = -w0
            g = np.minimum(0.5 * (1.0 + np.maximum(np.abs(x0), np.abs(x1))), 1.0)
            gmax = g.max()
            if found and gmax <= best:
                continue
            w_maxes = (w1.max(), w2.max(), w3.max())
            w_mins = (w1.min(), w2.min(), w3.min())
            rest_max = w_maxes[0] + (w_maxes[1] + w_maxes[2])
            rest_min = w_mins[0] + (w_mins[1] + w_mins[2])
            if w0.max() + rest_max < lo - _PRUNE_MARGIN:
                continue
            if w0.min() + rest_min > hi + _PRUNE_MARGIN:
                continue
            m23 = np.maximum(g[:, None], g[None, :])
            for i0 in range(P):
                s0 = w0[i0]
                if s0 + rest_max < lo - _PRUNE_MARGIN or s0 + rest_min > hi + _PRUNE_MARGIN:
                    continue
                base01 = s0 + w1
                g0 = g[i0]
                for s in range(0, P, block):
                    e = min(s + block, P)
                    w = (base01[s:e, None, None] + w2[:, None]) + w3
                    mask = np.abs(w - t_target) <= band
                    if not mask.any():
                        continue
                    found = True
                    gg = np.maximum(
                        np.maximum(g0, g[s:e])[:, None, None], m23[None, :, :]
                    )
                    vals = np.where(mask, gg, -1.0)
                    flat = int(vals.argmax())
                    v = float(vals.flat[flat])
                    if v > best:
                        i1, r = divmod(flat, P * P)
                        i2, i3 = divmod(r, P)
                        best = v
                        best_combo = (m0, m1, i0, s + i1, i2, i3)
                        if best == 1.0:
                            return True, best, _params_from_combo(
                                th_grid, et_grid, res, best_combo
                            )
    if not found:
        return False, -1.0, None
    return True, best, _params_from_combo(th_grid, et_grid, res, best_combo)
