"""Throughput fronts over traced designs, and non-dominated filtering.

Three planar curves approximate the trade-off frontier: the image of the
lifted subspace trace with linearly interpolated inactive coordinates, the
image of a straight segment between the two full-space single-objective
maximizers, and the inactive-conditional mean along the trace.  A Kung-style
divide-and-conquer extracts the non-dominated subset of sampled responses.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .exceptions import DimensionError, DomainError, OptimizationError
from .geometry import InactiveSampler
from .model import CoexistenceModel
from .trace import TraceCurve


@dataclass
class FrontCurve:
    """Per-weight throughput pairs, optionally with inactive-sampling spread."""

    t_grid: np.ndarray
    f_wifi: np.ndarray
    f_laa: np.ndarray
    kind: str
    f_wifi_min: np.ndarray | None = None
    f_wifi_max: np.ndarray | None = None
    f_laa_min: np.ndarray | None = None
    f_laa_max: np.ndarray | None = None

    def __post_init__(self):
        n = np.asarray(self.t_grid).size
        for arr in (self.f_wifi, self.f_laa, self.f_wifi_min, self.f_wifi_max, self.f_laa_min, self.f_laa_max):
            if arr is not None and np.asarray(arr).size != n:
                raise DimensionError("front arrays must share a length")


def _feasible_span(trace: TraceCurve):
    """Longest contiguous run of feasible trace points (start, end inclusive)."""
    ok = np.asarray(trace.feasible, dtype=bool)
    if not ok.any():
        raise DomainError("trace has no feasible points")
    best_len, best = 0, (0, 0)
    i = 0
    n = ok.size
    while i < n:
        if ok[i]:
            j = i
            while j + 1 < n and ok[j + 1]:
                j += 1
            if j - i + 1 > best_len:
                best_len, best = j - i + 1, (i, j)
            i = j + 1
        else:
            i += 1
    if best_len < ok.size:
        warnings.warn(
            f"trace clipped to its feasible span t in "
            f"[{trace.t_grid[best[0]]:.4f}, {trace.t_grid[best[1]]:.4f}]",
            RuntimeWarning,
        )
    return best


def _subsample_indices(start: int, end: int, n_t: int) -> np.ndarray:
    if n_t < 2:
        raise DomainError("fronts need at least two points")
    return np.unique(np.round(np.linspace(start, end, n_t)).astype(int))


def inactive_endpoints(
    model: CoexistenceModel,
    basis: np.ndarray,
    gamma0: np.ndarray,
    gamma1: np.ndarray,
    multistart: int = 10,
    seed: int = 0,
    maxfev: int = 400,
):
    """Best inactive coordinates at the two trace ends.

    The left end maximizes Wi-Fi throughput over the feasible slice of
    ``gamma0``; the right end maximizes LAA throughput at ``gamma1``.
    Derivative-free multistart over the inactive coordinates, with starts
    drawn feasibly and infeasible lifts rejected by penalty.
    """
    sampler = InactiveSampler(np.asarray(basis, dtype=float))

    def optimize(gamma, pick, stream):
        gamma = np.asarray(gamma, dtype=float)
        starts = sampler.sample(gamma, multistart, seed=stream)

        def objective(zeta):
            lift = sampler.lift(gamma, zeta)
            overshoot = float(np.max(np.abs(lift))) - 1.0
            if overshoot > 1e-9:
                return 1e6 * (1.0 + overshoot)
            try:
                f_w, f_l = model.throughput_unit(np.clip(lift, -1.0, 1.0))
            except Exception:
                return 1e6
            return -pick(f_w, f_l)

        best_z, best_val = None, np.inf
        for x0 in starts:
            res = minimize(
                objective,
                x0,
                method="Nelder-Mead",
                options={"maxfev": maxfev, "xatol": 1e-5, "fatol": 1e-9},
            )
            if res.fun < best_val:
                best_val, best_z = float(res.fun), res.x
        if best_z is None or best_val >= 1e6:
            raise OptimizationError("no feasible inactive endpoint found")
        return best_z

    zeta0 = optimize(gamma0, lambda f_w, f_l: f_w, np.random.SeedSequence((seed, 0)))
    zeta1 = optimize(gamma1, lambda f_w, f_l: f_l, np.random.SeedSequence((seed, 1)))
    return zeta0, zeta1


def _evaluate_lift(model: CoexistenceModel, lift: np.ndarray):
    overshoot = float(np.max(np.abs(lift))) - 1.0
    if overshoot > 1e-9:
        warnings.warn(
            f"front point left the design cube by {overshoot:.2e}; projected onto the box",
            RuntimeWarning,
        )
    return model.throughput_unit(np.clip(lift, -1.0, 1.0))


def geodesic_front(
    model: CoexistenceModel,
    basis: np.ndarray,
    active_trace: TraceCurve,
    zeta0: np.ndarray,
    zeta1: np.ndarray,
    n_t: int = 15,
) -> FrontCurve:
    """True-model front along the lifted trace with interpolated inactive part."""
    basis = np.asarray(basis, dtype=float)
    sampler = InactiveSampler(basis)
    start, end = _feasible_span(active_trace)
    idx = _subsample_indices(start, end, n_t)
    t_vals = active_trace.t_grid[idx]
    f_w = np.empty(idx.size)
    f_l = np.empty(idx.size)
    for k, i in enumerate(idx):
        t = active_trace.t_grid[i]
        zeta = t * np.asarray(zeta1, dtype=float) + (1.0 - t) * np.asarray(zeta0, dtype=float)
        lift = sampler.lift(active_trace.points[i], zeta)
        f_w[k], f_l[k] = _evaluate_lift(model, lift)
    return FrontCurve(t_grid=t_vals, f_wifi=f_w, f_laa=f_l, kind="geodesic")


def linear_front(
    model: CoexistenceModel, theta0_unit: np.ndarray, theta1_unit: np.ndarray, n_t: int = 15
) -> FrontCurve:
    """True-model front along the straight segment between two unit designs."""
    theta0 = np.asarray(theta0_unit, dtype=float)
    theta1 = np.asarray(theta1_unit, dtype=float)
    if np.max(np.abs(theta0)) > 1.0 + 1e-9 or np.max(np.abs(theta1)) > 1.0 + 1e-9:
        raise DomainError("segment endpoints must lie in the design cube")
    t_vals = np.linspace(0.0, 1.0, n_t)
    f_w = np.empty(n_t)
    f_l = np.empty(n_t)
    for k, t in enumerate(t_vals):
        point = (1.0 - t) * theta0 + t * theta1
        f_w[k], f_l[k] = model.throughput_unit(np.clip(point, -1.0, 1.0))
    return FrontCurve(t_grid=t_vals, f_wifi=f_w, f_laa=f_l, kind="linear")


def conditional_front(
    model: CoexistenceModel,
    basis: np.ndarray,
    active_trace: TraceCurve,
    n_t: int = 15,
    n_inactive: int = 25,
    seed: int = 0,
) -> FrontCurve:
    """Monte-Carlo mean front over inactive coordinates along the trace.

    Per weight, ``n_inactive`` feasible inactive draws are evaluated with a
    per-point random stream keyed on (seed, grid index); the per-weight
    min/max of both throughputs is recorded as the spread.
    """
    basis = np.asarray(basis, dtype=float)
    sampler = InactiveSampler(basis)
    start, end = _feasible_span(active_trace)
    idx = _subsample_indices(start, end, n_t)
    n = idx.size
    f_w = np.empty(n)
    f_l = np.empty(n)
    f_w_min = np.empty(n)
    f_w_max = np.empty(n)
    f_l_min = np.empty(n)
    f_l_max = np.empty(n)
    for k, i in enumerate(idx):
        gamma = active_trace.points[i]
        zetas = sampler.sample(gamma, n_inactive, seed=np.random.SeedSequence((seed, int(i))))
        vals = np.array([_evaluate_lift(model, sampler.lift(gamma, z)) for z in zetas])
        f_w[k], f_l[k] = vals.mean(axis=0)
        f_w_min[k], f_l_min[k] = vals.min(axis=0)
        f_w_max[k], f_l_max[k] = vals.max(axis=0)
    return FrontCurve(
        t_grid=active_trace.t_grid[idx],
        f_wifi=f_w,
        f_laa=f_l,
        kind="conditional",
        f_wifi_min=f_w_min,
        f_wifi_max=f_w_max,
        f_laa_min=f_l_min,
        f_laa_max=f_l_max,
    )


def nondominated(points: np.ndarray) -> np.ndarray:
    """Indices of maximal points under componentwise >= (both maximized).

    Kung divide-and-conquer on points sorted by the first objective.
    Duplicate pairs keep only their first occurrence.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 2:
        raise DimensionError("expected an (N, 2) array of objective pairs")
    n = pts.shape[0]
    if n == 0:
        return np.array([], dtype=int)
    order = np.lexsort((np.arange(n), -pts[:, 1], -pts[:, 0]))

    def front(idx_sorted):
        if len(idx_sorted) <= 1:
            return list(idx_sorted)
        mid = len(idx_sorted) // 2
        top = front(idx_sorted[:mid])
        bottom = front(idx_sorted[mid:])
        cutoff = max(pts[i, 1] for i in top)
        return top + [i for i in bottom if pts[i, 1] > cutoff]

    keep = front(list(order))
    return np.array(sorted(keep), dtype=int)


def nondominated_bruteforce(points: np.ndarray) -> np.ndarray:
    """Quadratic-time all-pairs oracle for :func:`nondominated`."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    # ge[i, j]: point j >= point i in both coordinates; gt: > in at least one.
    ge = (pts[None, :, :] >= pts[:, None, :]).all(axis=2)
    gt = (pts[None, :, :] > pts[:, None, :]).any(axis=2)
    dominated = (ge & gt).any(axis=1)
    eq = (pts[None, :, :] == pts[:, None, :]).all(axis=2)
    earlier_duplicate = (np.tril(eq, k=-1)).any(axis=1)
    return np.flatnonzero(~dominated & ~earlier_duplicate)
