"""Pareto tracing over a pair of convex quadratic surrogates.

With both negated throughputs modeled as convex quadratics, the maximizer
of every convex combination of the two throughputs has a closed form in the
weight t; integrating the stationarity ODE with the surrogates' analytic
derivatives reproduces the same curve and is kept as an independent check.
Also provides the conditioning diagnostic of the combined Hessian and
derivative-free box-constrained maximization of the true model.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .exceptions import DimensionError, DomainError, IntegrationError, OptimizationError
from .model import CoexistenceModel, Network
from .surrogate import PSDQuadraticSurrogate

_SINGULAR_EIG = 1e-12
_TIKHONOV_RATIO = 1e-10


class UnitCube:
    """Feasibility region |x|_inf <= 1, the default for full-space traces."""

    def __init__(self, dim: int):
        self.dim = dim

    def contains(self, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.all(np.abs(pts) <= 1.0 + tol, axis=1)
        return inside if np.asarray(points).ndim > 1 else bool(inside[0])


@dataclass
class TraceCurve:
    """Scalarization-maximizer curve over the weight grid."""

    t_grid: np.ndarray
    points: np.ndarray
    feasible: np.ndarray
    regularized: np.ndarray = field(default=None)

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        self.points = np.asarray(self.points, dtype=float)
        self.feasible = np.asarray(self.feasible, dtype=bool)
        if np.any(np.diff(self.t_grid) <= 0):
            raise DomainError("trace grid must be strictly increasing")
        if self.points.shape[0] != self.t_grid.size or self.feasible.size != self.t_grid.size:
            raise DimensionError("trace arrays must share a length")
        if self.regularized is None:
            self.regularized = np.zeros(self.t_grid.size, dtype=bool)

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _check_pair(sur_w: PSDQuadraticSurrogate, sur_l: PSDQuadraticSurrogate) -> int:
    if sur_w.dim_ != sur_l.dim_:
        raise DimensionError("surrogates must share a dimension")
    return sur_w.dim_


def _combined_quadratic(sur_w, sur_l, t: float):
    """Convex combination t*Q_laa + (1-t)*Q_wifi and the matching linear term."""
    h = t * sur_l.Q_ + (1.0 - t) * sur_w.Q_
    rhs = (t - 1.0) * sur_w.a_ - t * sur_l.a_
    return h, rhs


def _solve_regularized(h: np.ndarray, rhs: np.ndarray):
    """Solve h x = rhs with an eigenvalue floor when h is near-singular."""
    vals, vecs = np.linalg.eigh(h)
    lam_max = float(vals[-1])
    regularized = bool(vals[0] < _SINGULAR_EIG)
    if regularized:
        if lam_max <= 0.0:
            return None, True
        vals = np.maximum(vals, _TIKHONOV_RATIO * lam_max)
    x = vecs @ ((vecs.T @ rhs) / vals)
    return x, regularized


def quadratic_trace(
    sur_w: PSDQuadraticSurrogate,
    sur_l: PSDQuadraticSurrogate,
    t_grid: np.ndarray,
    region=None,
) -> TraceCurve:
    """Closed-form scalarization maximizers of the surrogate pair.

    Each point solves the stationarity system of the weight-t combination;
    near-singular Hessian combinations get an eigenvalue floor and are
    flagged via ``regularized``.  Feasibility of each point against
    ``region`` (unit cube by default) is recorded, never enforced.
    """
    dim = _check_pair(sur_w, sur_l)
    region = region if region is not None else UnitCube(dim)
    t_grid = np.asarray(t_grid, dtype=float)
    points = np.full((t_grid.size, dim), np.nan)
    feasible = np.zeros(t_grid.size, dtype=bool)
    regularized = np.zeros(t_grid.size, dtype=bool)
    for i, t in enumerate(t_grid):
        h, rhs = _combined_quadratic(sur_w, sur_l, t)
        x, reg = _solve_regularized(h, 0.5 * rhs)
        regularized[i] = reg
        if x is None:
            feasible[i] = False
            continue
        points[i] = x
        feasible[i] = bool(region.contains(x)) if np.all(np.isfinite(x)) else False
    return TraceCurve(t_grid=t_grid, points=points, feasible=feasible, regularized=regularized)


def rk4_path(rhs, t_grid: np.ndarray, x0: np.ndarray, step: float) -> np.ndarray:
    """Classical fixed-step RK4, returning the state at every grid node.

    Each grid interval is covered by round(interval / step) equal substeps
    (at least one), so halving ``step`` exactly doubles the work.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if step <= 0.0:
        raise DomainError("step size must be positive")
    x = np.asarray(x0, dtype=float).copy()
    points = np.empty((t_grid.size, x.size))
    points[0] = x
    for i in range(t_grid.size - 1):
        t0, t1 = float(t_grid[i]), float(t_grid[i + 1])
        n_steps = max(1, round((t1 - t0) / step))
        h = (t1 - t0) / n_steps
        for k in range(n_steps):
            t = t0 + k * h
            k1 = rhs(t, x)
            k2 = rhs(t + h / 2.0, x + h / 2.0 * k1)
            k3 = rhs(t + h / 2.0, x + h / 2.0 * k2)
            k4 = rhs(t + h, x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        points[i + 1] = x
    return points


def ode_trace(
    sur_w: PSDQuadraticSurrogate,
    sur_l: PSDQuadraticSurrogate,
    t_grid: np.ndarray,
    step: float = 1e-3,
    initial_point: np.ndarray | None = None,
    region=None,
) -> TraceCurve:
    """Integrate the stationarity ODE with classical fixed-step RK4.

    The combined curvature times the point velocity equals the difference
    of the two objective gradients; for quadratic surrogates the flow map is
    the inverse combined Hessian applied to its start value, which RK4
    reproduces to rounding, so this doubles as an independent check of
    :func:`quadratic_trace`.
    """
    dim = _check_pair(sur_w, sur_l)
    region = region if region is not None else UnitCube(dim)
    t_grid = np.asarray(t_grid, dtype=float)
    if initial_point is None:
        start = quadratic_trace(sur_w, sur_l, np.array([t_grid[0], 1.0]), region=region)
        if not np.all(np.isfinite(start.points[0])):
            raise IntegrationError("no finite initial point", t=float(t_grid[0]))
        initial_point = start.points[0]

    def rhs(t, x):
        hess = -2.0 * (t * sur_l.Q_ + (1.0 - t) * sur_w.Q_)
        vals = np.linalg.eigvalsh(hess)
        if np.min(np.abs(vals)) < _SINGULAR_EIG:
            raise IntegrationError(f"singular combined curvature at t={t:.6f}", t=float(t))
        grad_diff = sur_w.gradient(x) - sur_l.gradient(x)
        return np.linalg.solve(hess, grad_diff)

    points = rk4_path(rhs, t_grid, initial_point, step)
    feasible = np.asarray(region.contains(points))
    return TraceCurve(t_grid=t_grid, points=points, feasible=feasible)


def condition_profile(
    sur_w: PSDQuadraticSurrogate, sur_l: PSDQuadraticSurrogate, t_grid: np.ndarray
) -> np.ndarray:
    """Spectral condition number of the combined Hessian along the weight grid."""
    _check_pair(sur_w, sur_l)
    t_grid = np.asarray(t_grid, dtype=float)
    out = np.empty(t_grid.size)
    for i, t in enumerate(t_grid):
        h, _ = _combined_quadratic(sur_w, sur_l, t)
        vals = np.linalg.eigvalsh(h)
        out[i] = np.inf if vals[0] < 1e-14 else float(vals[-1] / vals[0])
    return out


def _scalarization_weight(which) -> float:
    if isinstance(which, Network):
        return 0.0 if which is Network.WIFI else 1.0
    t = float(which)
    if not 0.0 <= t <= 1.0:
        raise DomainError("scalarization weight must lie in [0, 1]")
    return t


def maximize_throughput(
    model: CoexistenceModel,
    which,
    multistart: int = 20,
    seed: int = 0,
    samples_unit: np.ndarray | None = None,
    sample_objectives: np.ndarray | None = None,
    maxfev: int = 2000,
):
    """Box-constrained maximizer of a throughput combination over the unit cube.

    ``which`` is a :class:`Network` or a weight t in [0, 1] mixing t * LAA +
    (1 - t) * Wi-Fi.  Multistart Nelder-Mead, clipped to the cube; when a
    sample set is supplied its best rows seed the starts, so the result is
    never worse than the best supplied sample.
    """
    t = _scalarization_weight(which)
    dim = model.domain.dim
    rng = np.random.default_rng(seed)

    def objective(u):
        u = np.clip(u, -1.0, 1.0)
        try:
            f_w, f_l = model.throughput_unit(u)
        except Exception:
            return np.inf
        return -(t * f_l + (1.0 - t) * f_w)

    starts = [np.zeros(dim)]
    if samples_unit is not None:
        if sample_objectives is None:
            raise DomainError("sample objectives required alongside sample starts")
        best_rows = np.argsort(sample_objectives)[::-1][:3]
        starts.extend(np.asarray(samples_unit)[best_rows])
    while len(starts) < multistart:
        starts.append(rng.uniform(-1.0, 1.0, dim))

    best_x, best_val = None, np.inf
    failures = 0
    for x0 in starts[:multistart]:
        try:
            with np.errstate(invalid="ignore"):
                res = minimize(
                    objective,
                    np.clip(x0, -1.0, 1.0),
                    method="Nelder-Mead",
                    bounds=[(-1.0, 1.0)] * dim,
                    options={"maxfev": maxfev, "xatol": 1e-6, "fatol": 1e-10},
                )
        except Exception:
            failures += 1
            continue
        if res.fun < best_val:
            best_val = float(res.fun)
            best_x = np.clip(res.x, -1.0, 1.0)
    if best_x is None:
        raise OptimizationError(f"all {multistart} restarts failed ({failures} raised)")
    return best_x, -best_val


def trace_to_rows(trace: TraceCurve) -> list[list]:
    """Flatten a trace for CSV emission: t, coordinates, flags."""
    rows = []
    for i, t in enumerate(trace.t_grid):
        rows.append(
            [float(t), *map(float, trace.points[i]), bool(trace.feasible[i]), bool(trace.regularized[i])]
        )
    return rows
