"""Guessing-probability maximization at fixed witness value.

The search space is ten Bloch angles: four preparations plus the second
measurement, the first measurement being pinned to the computational
basis.  A multi-start Nelder-Mead simplex (all starts iterated in one
vectorized batch) maximizes ``p_guess(x) - mu * (T(x) - t)**2`` while
``mu`` steps through an increasing penalty schedule, each stage warm
started from the last and guarded so the constraint residual of each
start never increases.  Reported values are always recomputed through
the qubit and witness modules, not taken from the search internals.

An exhaustive grid oracle over the same parametrization provides
independent reference values, and :func:`sweep_curve` produces the
min-entropy-versus-witness curve with its delimited-text interchange
format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .qubit import TWO_PI, BinaryMeasurement, Device, PureQubit, behavior_table
from .witness import guessing_probability, min_entropy, quantum_bound, witness_value

__all__ = [
    "N_PARAMS",
    "PARAM_NAMES",
    "CURVE_COLUMNS",
    "InfeasibleError",
    "OptimizationSettings",
    "CurvePoint",
    "params_to_device",
    "device_to_params",
    "random_start",
    "maximize_guessing_at_t",
    "maximize_witness",
    "sweep_curve",
    "monotonize_curve",
    "default_curve_grid",
    "grid_oracle_max_guessing",
    "grid_oracle_search",
    "write_curve",
    "read_curve",
]

N_PARAMS = 10

PARAM_NAMES = (
    "theta_00",
    "eta_00",
    "theta_01",
    "eta_01",
    "theta_10",
    "eta_10",
    "theta_11",
    "eta_11",
    "theta_m1",
    "eta_m1",
)

CURVE_COLUMNS = ("t_target", "achieved_t", "p_guess", "h_min") + PARAM_NAMES

_LOWER = np.zeros(N_PARAMS)
_UPPER = np.array([math.pi, TWO_PI] * 5)
_LOWER.setflags(write=False)
_UPPER.setflags(write=False)


class InfeasibleError(RuntimeError):
    """No candidate satisfied the witness constraint."""

    def __init__(self, message: str, best_residual: float | None = None):
        super().__init__(message)
        self.best_residual = best_residual


@dataclass(frozen=True)
class OptimizationSettings:
    """Knobs for the multi-start penalty search.

    The penalty schedule runs further than the classic
    {10, 100, 1000, 10000} ladder: near the quantum bound the optimum
    approaches the target like sqrt of the residual, leaving the
    stationary residual of a mu = 1e4 stage near 7e-4, above
    ``constraint_tolerance``.  The extra decades bring it to ~1e-5.
    """

    starts: int = 64
    penalty_weight_schedule: tuple[float, ...] = (
        10.0,
        100.0,
        1e3,
        1e4,
        1e5,
        1e6,
        1e7,
    )
    constraint_tolerance: float = 1e-4
    convergence_tolerance: float = 1e-9
    max_iterations: int = 5000
    rng_seed: int = 12345

    def __post_init__(self) -> None:
        if self.starts < 1:
            raise ValueError("starts must be at least 1")
        sched = tuple(float(w) for w in self.penalty_weight_schedule)
        if not sched or any(w <= 0 for w in sched):
            raise ValueError("penalty weights must be positive")
        if any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("penalty weights must be strictly increasing")
        object.__setattr__(self, "penalty_weight_schedule", sched)
        if self.constraint_tolerance <= 0 or self.convergence_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must fit in 64 bits")


@dataclass(frozen=True)
class CurvePoint:
    """One sample of the min-entropy-versus-witness curve."""

    t_target: float
    p_guess: float
    h_min: float
    argmax_params: tuple[float, ...]
    achieved_t: float


def _canonical_params(x: np.ndarray) -> np.ndarray:
    """Clip rounding overshoot and fold eta = 2*pi onto 0."""
    out = np.array(x, dtype=float)
    th = out[0::2]
    et = out[1::2]
    np.clip(th, 0.0, math.pi, out=th)
    np.clip(et, 0.0, TWO_PI, out=et)
    et[et >= TWO_PI] = 0.0
    return out


def params_to_device(params) -> Device:
    """Build the Device described by a 10-entry parameter vector."""
    x = _canonical_params(np.asarray(params, dtype=float))
    if x.shape != (N_PARAMS,):
        raise ValueError(f"expected {N_PARAMS} parameters, got shape {x.shape}")
    preps = tuple(PureQubit(x[2 * a], x[2 * a + 1]) for a in range(4))
    meas = (
        BinaryMeasurement(0.0, 0.0, fixed_computational=True),
        BinaryMeasurement(x[8], x[9]),
    )
    return Device(preps, meas)


def device_to_params(device: Device) -> np.ndarray:
    """Inverse of :func:`params_to_device`.

    Requires the device's first measurement to be the pinned
    computational one, since the vector has no slot for it.
    """
    if not device.measurements[0].fixed_computational:
        raise ValueError("first measurement must be fixed to the computational basis")
    x = np.empty(N_PARAMS)
    for a, prep in enumerate(device.preparations):
        x[2 * a] = prep.theta
        x[2 * a + 1] = prep.eta
    x[8] = device.measurements[1].theta
    x[9] = device.measurements[1].eta
    return x


def random_start(rng_seed: int, index: int) -> np.ndarray:
    """Start ``index`` of the multi-start set, a pure function of both args."""
    if not 0 <= rng_seed < 2**64:
        raise ValueError("rng_seed must fit in 64 bits")
    if index < 0:
        raise ValueError("start index must be non-negative")
    gen = np.random.Generator(np.random.Philox(key=[rng_seed, index]))
    return _LOWER + gen.random(N_PARAMS) * (_UPPER - _LOWER)


def _nelder_mead_batch(func, x0, lower, upper, xatol, fatol, maxiter):
    """Minimize a batch objective over many simplexes simultaneously.

    ``func`` maps an (m, d) array to m values.  All simplexes take the
    same number of iterations bar individual convergence freezes, so
    the result is independent of scheduling.  Candidates are clipped
    into the box.  Returns the best vertex and value per start.
    """
    x0 = np.asarray(x0, dtype=float)
    n_simplex, d = x0.shape
    simplex = np.repeat(x0[:, None, :], d + 1, axis=1)
    step = 0.1 * (upper - lower)
    for i in range(d):
        moved = simplex[:, i + 1, i] + step[i]
        # step away from the wall instead of collapsing onto it
        moved = np.where(moved > upper[i], simplex[:, i + 1, i] - step[i], moved)
        simplex[:, i + 1, i] = np.clip(moved, lower[i], upper[i])
    fvals = func(simplex.reshape(-1, d)).reshape(n_simplex, d + 1)
    active = np.ones(n_simplex, dtype=bool)

    for _ in range(maxiter):
        order = np.argsort(fvals, axis=1, kind="stable")
        fvals = np.take_along_axis(fvals, order, axis=1)
        simplex = np.take_along_axis(simplex, order[:, :, None], axis=1)

        fspread = fvals[:, -1] - fvals[:, 0]
        xspread = np.abs(simplex - simplex[:, :1, :]).max(axis=(1, 2))
        active &= ~((fspread <= fatol) & (xspread <= xatol))
        if not active.any():
            break
        idx = np.flatnonzero(active)
        sub = simplex[idx]
        fsub = fvals[idx]

        centroid = sub[:, :-1, :].mean(axis=1)
        worst = sub[:, -1, :]
        fworst = fsub[:, -1]
        fbest = fsub[:, 0]
        fsecond = fsub[:, -2]

        xr = np.clip(centroid + (centroid - worst), lower, upper)
        fr = func(xr)

        expand = fr < fbest
        accept_r = ~expand & (fr < fsecond)
        out_con = ~expand & ~accept_r & (fr < fworst)
        in_con = ~expand & ~accept_r & ~out_con

        cand = xr.copy()
        cand[expand] = np.clip(
            centroid[expand] + 2.0 * (centroid[expand] - worst[expand]), lower, upper
        )
        cand[out_con] = np.clip(
            centroid[out_con] + 0.5 * (xr[out_con] - centroid[out_con]), lower, upper
        )
        cand[in_con] = np.clip(
            centroid[in_con] - 0.5 * (centroid[in_con] - worst[in_con]), lower, upper
        )
        need = ~accept_r
        fc = np.full(len(idx), np.inf)
        if need.any():
            fc[need] = func(cand[need])

        new_x = xr.copy()
        new_f = fr.copy()
        better = expand & (fc < fr)
        new_x[better] = cand[better]
        new_f[better] = fc[better]
        oc_ok = out_con & (fc <= fr)
        new_x[oc_ok] = cand[oc_ok]
        new_f[oc_ok] = fc[oc_ok]
        ic_ok = in_con & (fc < fworst)
        new_x[ic_ok] = cand[ic_ok]
        new_f[ic_ok] = fc[ic_ok]

        shrink = (out_con & ~oc_ok) | (in_con & ~ic_ok)
        accept = ~shrink
        sub[accept, -1, :] = new_x[accept]
        fsub[accept, -1] = new_f[accept]
        if shrink.any():
            rows = np.flatnonzero(shrink)
            pts = sub[rows, :1, :] + 0.5 * (sub[rows, 1:, :] - sub[rows, :1, :])
            pts = np.clip(pts, lower, upper)
            fsub[rows, 1:] = func(pts.reshape(-1, d)).reshape(len(rows), d)
            sub[rows, 1:, :] = pts

        simplex[idx] = sub
        fvals[idx] = fsub

    order = np.argsort(fvals, axis=1, kind="stable")
    best = order[:, 0]
    rows = np.arange(n_simplex)
    return simplex[rows, best, :], fvals[rows, best]


def _penalty_stages(x0s, t_target, settings, kernel):
    """Run the penalty schedule on a batch of starts.

    Returns the per-start incumbents and the residual history, an array
    of shape (stages + 1, starts) that is non-increasing down each
    column by construction: a stage result is only accepted for a start
    when it does not worsen that start's constraint residual.
    """
    xs = np.array(x0s, dtype=float)

    def residual(pts):
        t, _ = kernel.eval_batch(pts)
        return np.abs(t - t_target)

    history = [residual(xs)]
    xatol = 1e-8
    for mu in settings.penalty_weight_schedule:

        def objective(pts, mu=mu):
            t, p = kernel.eval_batch(pts)
            d = t - t_target
            return -p + mu * (d * d)

        new_xs, _ = _nelder_mead_batch(
            objective,
            xs,
            _LOWER,
            _UPPER,
            xatol=xatol,
            fatol=settings.convergence_tolerance,
            maxiter=settings.max_iterations,
        )
        new_res = residual(new_xs)
        accept = new_res <= history[-1]
        xs = np.where(accept[:, None], new_xs, xs)
        history.append(np.where(accept, new_res, history[-1]))
    return xs, np.stack(history)


def _authoritative_eval(params: np.ndarray) -> tuple[float, float]:
    """Witness value and guessing probability via the matrix route."""
    table = behavior_table(params_to_device(params))
    return witness_value(table), guessing_probability(table)


def _lexicographic_first(xs: np.ndarray, rows: np.ndarray) -> int:
    """Index (into rows) of the lexicographically smallest parameter row."""
    sub = xs[rows]
    order = np.lexsort(sub.T[::-1])
    return int(rows[order[0]])


def maximize_guessing_at_t(
    t_target: float,
    settings: OptimizationSettings | None = None,
    *,
    warm_starts=(),
    backend: str | None = None,
) -> CurvePoint:
    """Best found guessing probability among devices with witness ``t_target``.

    The result is a found maximum (a lower bound on the true optimum),
    never a certified one.  ``warm_starts`` adds parameter vectors to
    the fresh random starts; the curve sweep chains argmaxes this way.

    Raises :class:`InfeasibleError` when ``t_target`` exceeds the
    quantum bound (plus tolerance) or when no start reaches the
    constraint within ``constraint_tolerance``.
    """
    s = settings if settings is not None else OptimizationSettings()
    kernel = _kernels.get_backend(backend)
    qb = quantum_bound()
    if abs(t_target) > qb + s.constraint_tolerance:
        raise InfeasibleError(
            f"witness target {t_target:.6f} lies outside the qubit range "
            f"[-2*sqrt(2), 2*sqrt(2)]"
        )
    starts = [np.asarray(w, dtype=float).reshape(N_PARAMS) for w in warm_starts]
    starts += [random_start(s.rng_seed, k) for k in range(s.starts)]
    xs, _ = _penalty_stages(np.stack(starts), t_target, s, kernel)

    # Reduce on values recomputed through the matrix route; the kernel
    # lane is only a search engine here.
    evals = np.array([_authoritative_eval(_canonical_params(x)) for x in xs])
    resid = np.abs(evals[:, 0] - t_target)
    feasible = np.flatnonzero(resid <= s.constraint_tolerance)
    if feasible.size == 0:
        best = float(resid.min())
        raise InfeasibleError(
            f"no start reached |T - {t_target:.6f}| <= {s.constraint_tolerance:g}; "
            f"best residual {best:.3e}",
            best_residual=best,
        )
    p_best = evals[feasible, 1].max()
    tied = feasible[evals[feasible, 1] == p_best]
    chosen = _lexicographic_first(xs, tied) if tied.size > 1 else int(tied[0])
    params = _canonical_params(xs[chosen])
    t_val, p_val = _authoritative_eval(params)
    return CurvePoint(
        t_target=float(t_target),
        p_guess=p_val,
        h_min=min_entropy(p_val),
        argmax_params=tuple(params),
        achieved_t=t_val,
    )


def maximize_witness(
    settings: OptimizationSettings | None = None,
    *,
    negate: bool = False,
    backend: str | None = None,
) -> tuple[float, tuple[float, ...]]:
    """Unconstrained witness extremum: max T, or min T with ``negate``.

    Returns the best found value and its parameter vector; the value is
    recomputed through the matrix route.
    """
    s = settings if settings is not None else OptimizationSettings()
    kernel = _kernels.get_backend(backend)
    sign = -1.0 if negate else 1.0

    def objective(pts):
        t, _ = kernel.eval_batch(pts)
        return -(sign * t)

    x0 = np.stack([random_start(s.rng_seed, k) for k in range(s.starts)])
    xs, fs = _nelder_mead_batch(
        objective,
        x0,
        _LOWER,
        _UPPER,
        xatol=1e-8,
        fatol=s.convergence_tolerance,
        maxiter=s.max_iterations,
    )
    f_best = fs.min()
    tied = np.flatnonzero(fs == f_best)
    chosen = _lexicographic_first(xs, tied) if tied.size > 1 else int(tied[0])
    params = _canonical_params(xs[chosen])
    t_val, _ = _authoritative_eval(params)
    return t_val, tuple(params)


def default_curve_grid() -> list[float]:
    """Witness grid 2.00 to 2.82 in steps of 0.02 plus the exact 2*sqrt(2)."""
    grid = [2.0 + 0.02 * k for k in range(42)]
    grid.append(quantum_bound())
    return grid


def sweep_curve(
    t_grid,
    settings: OptimizationSettings | None = None,
    *,
    backend: str | None = None,
) -> list[CurvePoint]:
    """One CurvePoint per grid value, post-processed to a monotone curve.

    Each point warm-starts from the previous argmax in addition to the
    fresh random starts.  Per-point infeasibility propagates.
    """
    grid = [float(t) for t in t_grid]
    if not grid:
        raise ValueError("t_grid must not be empty")
    qb = quantum_bound()
    for t in grid:
        if not 2.0 - 1e-9 <= t <= qb + 1e-9:
            raise ValueError(f"grid value {t} outside [2, 2*sqrt(2)]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid values must be ascending")
    points: list[CurvePoint] = []
    prev: tuple[float, ...] | None = None
    for t in grid:
        warm = () if prev is None else (prev,)
        pt = maximize_guessing_at_t(t, settings, warm_starts=warm, backend=backend)
        points.append(pt)
        prev = pt.argmax_params
    return monotonize_curve(points)


def monotonize_curve(points: list[CurvePoint]) -> list[CurvePoint]:
    """Enforce non-increasing p_guess in T by cumulative max from high T down.

    The true optimum is non-increasing on [2, 2*sqrt(2)] because the
    constraint sets shrink toward the rigid point; found values may
    jitter below it, so raising them toward the right neighbor is safe.
    """
    out: list[CurvePoint] = []
    running = -1.0
    for pt in reversed(points):
        running = max(running, pt.p_guess)
        if running != pt.p_guess:
            pt = replace(pt, p_guess=running, h_min=min_entropy(running))
        out.append(pt)
    out.reverse()
    return out


def grid_oracle_search(
    t_target: float,
    resolution: int,
    band: float,
    *,
    free_y0: bool = False,
    backend: str | None = None,
) -> tuple[float, np.ndarray]:
    """Oracle maximum plus the winning grid angles (12 entries).

    The last two entries are the first measurement's angles, zeros
    unless ``free_y0`` grids that measurement as well.
    """
    if resolution < 5:
        raise ValueError(f"resolution must be at least 5, got {resolution}")
    if not band > 0:
        raise ValueError(f"band must be positive, got {band}")
    kernel = _kernels.get_backend(backend)
    found, best_p, params = kernel.oracle_search(
        float(t_target), int(resolution), float(band), bool(free_y0)
    )
    if not found:
        raise InfeasibleError(
            f"no grid point within {band:g} of witness {t_target:.6f} "
            f"at resolution {resolution}"
        )
    return float(best_p), params


def grid_oracle_max_guessing(
    t_target: float,
    resolution: int,
    band: float,
    *,
    free_y0: bool = False,
    backend: str | None = None,
) -> float:
    """Exhaustive-grid reference for :func:`maximize_guessing_at_t`."""
    best_p, _ = grid_oracle_search(
        t_target, resolution, band, free_y0=free_y0, backend=backend
    )
    return best_p


def write_curve(path, points: list[CurvePoint]) -> None:
    """Write the curve interchange file: header plus one row per point."""
    lines = [",".join(CURVE_COLUMNS)]
    for pt in points:
        row = (pt.t_target, pt.achieved_t, pt.p_guess, pt.h_min) + tuple(
            pt.argmax_params
        )
        lines.append(",".join(f"{v:.17g}" for v in row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_curve(path) -> list[CurvePoint]:
    """Parse a curve file written by :func:`write_curve`."""
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty curve file")
    header = tuple(lines[0].split(","))
    if header != CURVE_COLUMNS:
        raise ValueError(
            f"{path}: bad header; expected {','.join(CURVE_COLUMNS)!r}"
        )
    points = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != len(CURVE_COLUMNS):
            raise ValueError(
                f"{path}:{lineno}: expected {len(CURVE_COLUMNS)} fields, "
                f"got {len(fields)}"
            )
        try:
            vals = [float(f) for f in fields]
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
        t_target, achieved_t, p_guess, h_min = vals[:4]
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"{path}:{lineno}: non-finite value")
        if not 0.5 <= p_guess <= 1.0:
            raise ValueError(f"{path}:{lineno}: p_guess {p_guess} outside [0.5, 1]")
        if abs(h_min - (-math.log2(p_guess))) > 1e-9:
            raise ValueError(
                f"{path}:{lineno}: h_min {h_min} inconsistent with p_guess {p_guess}"
            )
        points.append(
            CurvePoint(
                t_target=t_target,
                p_guess=p_guess,
                h_min=h_min,
                argmax_params=tuple(vals[4:]),
                achieved_t=achieved_t,
            )
        )
    return points
