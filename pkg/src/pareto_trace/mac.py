"""Saturation MAC model: coupled transmission/collision probabilities.

Two contention-based networks (Wi-Fi APs and LAA eNodeBs) share one
unlicensed channel.  Each node's transmission probability follows Bianchi's
saturation fixed point given its collision probability; collision
probabilities couple the two networks through the product of complementary
transmission probabilities.  The resulting 2(W+L) nonlinear system is solved
with a dogleg trust-region root finder, with a damped fixed-point fallback.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import root

from .exceptions import DomainError, SolverError


def bianchi_probability(c, omega, mu):
    """Saturation transmission probability of a node in a random slot.

    Continuous in the collision probability ``c``, including across c = 1/2
    where the defining ratio is an indeterminate 0/0 with analytic limit
    4 / (2 + 2*omega + mu*omega).  ``mu`` may be non-integer; (2c)^mu uses
    real exponentiation.
    """
    c = np.asarray(c, dtype=float)
    omega = np.asarray(omega, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if np.any((c < 0.0) | (c >= 1.0)):
        raise DomainError("collision probability must lie in [0, 1)")
    if np.any(omega <= 0.0):
        raise DomainError("contention window must be positive")
    if np.any(mu < 0.0):
        raise DomainError("back-off stage must be nonnegative")
    c, omega, mu = np.broadcast_arrays(c, omega, mu)
    near_half = np.abs(1.0 - 2.0 * c) < 1e-12
    c_safe = np.where(near_half, 0.0, c)
    one_minus = 1.0 - 2.0 * c_safe
    denom = one_minus * (1.0 + omega) + c_safe * omega * (1.0 - (2.0 * c_safe) ** mu)
    p = np.where(near_half, 4.0 / (2.0 + 2.0 * omega + mu * omega), 2.0 * one_minus / denom)
    if p.ndim == 0:
        return float(p)
    return p


def collision_probabilities(p_w, p_l):
    """Per-node collision probabilities from both networks' transmit probabilities.

    A node collides unless every other node (own network, excluding itself,
    and the whole other network) stays silent; the own-node factor is removed
    by dividing the own-network silence product by (1 - p) of that node.
    """
    p_w = np.asarray(p_w, dtype=float)
    p_l = np.asarray(p_l, dtype=float)
    for p in (p_w, p_l):
        if np.any((p < 0.0) | (p >= 1.0)):
            raise DomainError("transmission probabilities must lie in [0, 1)")
    comp_w = 1.0 - p_w
    comp_l = 1.0 - p_l
    if np.any(comp_w == 0.0) or np.any(comp_l == 0.0):
        raise DomainError("complementary transmission probability is zero")
    z_w = np.prod(comp_w)
    z_l = np.prod(comp_l)
    c_w = 1.0 - (z_w / comp_w) * z_l
    c_l = 1.0 - (z_l / comp_l) * z_w
    return np.clip(c_w, 0.0, 1.0), np.clip(c_l, 0.0, 1.0)


@dataclass
class MacParameters:
    """Per-node contention parameters for both networks."""

    omega_w: np.ndarray
    mu_w: np.ndarray
    omega_l: np.ndarray
    mu_l: np.ndarray

    def __post_init__(self):
        self.omega_w = np.atleast_1d(np.asarray(self.omega_w, dtype=float))
        self.mu_w = np.atleast_1d(np.asarray(self.mu_w, dtype=float))
        self.omega_l = np.atleast_1d(np.asarray(self.omega_l, dtype=float))
        self.mu_l = np.atleast_1d(np.asarray(self.mu_l, dtype=float))
        if self.omega_w.shape != self.mu_w.shape or self.omega_l.shape != self.mu_l.shape:
            raise DomainError("window/back-off vectors must match in length per network")
        for arr in (self.omega_w, self.mu_w, self.omega_l, self.mu_l):
            if not np.all(np.isfinite(arr)):
                raise DomainError("MAC parameters must be finite")
        if np.any(self.omega_w <= 0) or np.any(self.omega_l <= 0):
            raise DomainError("contention windows must be positive")
        if np.any(self.mu_w < 0) or np.any(self.mu_l < 0):
            raise DomainError("back-off stages must be nonnegative")

    @classmethod
    def uniform(cls, omega_w, omega_l, mu_w, mu_l, n_wifi, n_laa) -> "MacParameters":
        """Common per-network parameters broadcast over node counts."""
        return cls(
            omega_w=np.full(n_wifi, float(omega_w)),
            mu_w=np.full(n_wifi, float(mu_w)),
            omega_l=np.full(n_laa, float(omega_l)),
            mu_l=np.full(n_laa, float(mu_l)),
        )

    @property
    def n_wifi(self) -> int:
        return self.omega_w.size

    @property
    def n_laa(self) -> int:
        return self.omega_l.size

    def is_uniform(self) -> bool:
        return (
            np.ptp(self.omega_w) == 0.0
            and np.ptp(self.mu_w) == 0.0
            and np.ptp(self.omega_l) == 0.0
            and np.ptp(self.mu_l) == 0.0
        )


@dataclass
class SolverOptions:
    tol: float = 1e-10
    max_iter: int = 400
    damping: float = 0.5
    fallback_iters: int = 200


@dataclass
class ProbabilityState:
    """Solved transmission/collision probabilities for all nodes."""

    p_w: np.ndarray
    p_l: np.ndarray
    c_w: np.ndarray
    c_l: np.ndarray
    residual_norm: float = 0.0
    fallback: bool = field(default=False, compare=False)


_P_CAP = 1.0 - 1e-12


def _residual(x, mac: MacParameters):
    w, ell = mac.n_wifi, mac.n_laa
    p_w = np.clip(x[:w], 0.0, _P_CAP)
    p_l = np.clip(x[w : w + ell], 0.0, _P_CAP)
    c_w = np.clip(x[w + ell : 2 * w + ell], 0.0, _P_CAP)
    c_l = np.clip(x[2 * w + ell :], 0.0, _P_CAP)
    cc_w, cc_l = collision_probabilities(p_w, p_l)
    r = np.concatenate(
        [
            p_w - bianchi_probability(c_w, mac.omega_w, mac.mu_w),
            p_l - bianchi_probability(c_l, mac.omega_l, mac.mu_l),
            c_w - cc_w,
            c_l - cc_l,
        ]
    )
    return r


def _initial_guess(mac: MacParameters):
    p_w = np.atleast_1d(bianchi_probability(np.zeros(mac.n_wifi), mac.omega_w, mac.mu_w))
    p_l = np.atleast_1d(bianchi_probability(np.zeros(mac.n_laa), mac.omega_l, mac.mu_l))
    c_w, c_l = collision_probabilities(p_w, p_l)
    return np.concatenate([p_w, p_l, c_w, c_l])


def _state_from_vector(x, mac: MacParameters, fallback: bool) -> ProbabilityState:
    w, ell = mac.n_wifi, mac.n_laa
    res = float(np.max(np.abs(_residual(x, mac))))
    return ProbabilityState(
        p_w=np.clip(x[:w], 0.0, _P_CAP),
        p_l=np.clip(x[w : w + ell], 0.0, _P_CAP),
        c_w=np.clip(x[w + ell : 2 * w + ell], 0.0, 1.0),
        c_l=np.clip(x[2 * w + ell :], 0.0, 1.0),
        residual_norm=res,
        fallback=fallback,
    )


def _solve_vector(mac: MacParameters, opts: SolverOptions):
    """Trust-region solve with damped fixed-point + re-entry fallback."""
    x0 = _initial_guess(mac)
    sol = root(_residual, x0, args=(mac,), method="hybr", options={"xtol": 1e-13, "maxfev": 200 * x0.size})
    if np.max(np.abs(sol.fun)) < opts.tol:
        return sol.x, False
    # Damped fixed-point iteration to pull the iterate into the basin,
    # then hand back to the trust region for a final polish.
    w, ell = mac.n_wifi, mac.n_laa
    p_w, p_l = x0[:w], x0[w : w + ell]
    c_w, c_l = x0[w + ell : 2 * w + ell], x0[2 * w + ell :]
    d = opts.damping
    for _ in range(opts.fallback_iters):
        new_p_w = bianchi_probability(np.clip(c_w, 0.0, _P_CAP), mac.omega_w, mac.mu_w)
        new_p_l = bianchi_probability(np.clip(c_l, 0.0, _P_CAP), mac.omega_l, mac.mu_l)
        p_w = (1.0 - d) * p_w + d * new_p_w
        p_l = (1.0 - d) * p_l + d * new_p_l
        new_c_w, new_c_l = collision_probabilities(np.clip(p_w, 0.0, _P_CAP), np.clip(p_l, 0.0, _P_CAP))
        c_w = (1.0 - d) * c_w + d * new_c_w
        c_l = (1.0 - d) * c_l + d * new_c_l
    x1 = np.concatenate([p_w, p_l, c_w, c_l])
    sol = root(_residual, x1, args=(mac,), method="hybr", options={"xtol": 1e-13, "maxfev": 200 * x1.size})
    if np.max(np.abs(sol.fun)) < opts.tol:
        return sol.x, True
    raise SolverError(
        f"probability system did not converge (last residual {np.max(np.abs(sol.fun)):.3e})",
        residual=float(np.max(np.abs(sol.fun))),
    )


def solve_probability_system(mac: MacParameters, opts: SolverOptions | None = None) -> ProbabilityState:
    """Solve the coupled 2(W+L) probability system to ``opts.tol`` (max-norm).

    When contention parameters are common within each network the system is
    solved in its 4-unknown symmetric reduction and broadcast, which is exact
    because identical nodes obey identical equations.
    """
    opts = opts or SolverOptions()
    if mac.is_uniform():
        x, fb = _solve_symmetric(mac, opts)
    else:
        x, fb = _solve_vector(mac, opts)
    state = _state_from_vector(x, mac, fb)
    if state.residual_norm >= opts.tol:
        raise SolverError(
            f"probability system residual {state.residual_norm:.3e} exceeds tol {opts.tol:.1e}",
            residual=state.residual_norm,
        )
    return state


def _solve_symmetric(mac: MacParameters, opts: SolverOptions):
    """Solve the per-network-uniform system over 4 scalar unknowns."""
    w, ell = mac.n_wifi, mac.n_laa
    ow, ol = mac.omega_w[0], mac.omega_l[0]
    mw, ml = mac.mu_w[0], mac.mu_l[0]

    def residual4(y):
        p_w, p_l, c_w, c_l = np.clip(y, 0.0, _P_CAP)
        comp_w, comp_l = 1.0 - p_w, 1.0 - p_l
        cc_w = 1.0 - comp_w ** (w - 1) * comp_l**ell
        cc_l = 1.0 - comp_l ** (ell - 1) * comp_w**w
        return np.array(
            [
                p_w - bianchi_probability(c_w, ow, mw),
                p_l - bianchi_probability(c_l, ol, ml),
                c_w - cc_w,
                c_l - cc_l,
            ]
        )

    p_w0 = bianchi_probability(0.0, ow, mw)
    p_l0 = bianchi_probability(0.0, ol, ml)
    c_w0 = 1.0 - (1.0 - p_w0) ** (w - 1) * (1.0 - p_l0) ** ell
    c_l0 = 1.0 - (1.0 - p_l0) ** (ell - 1) * (1.0 - p_w0) ** w
    y0 = np.array([p_w0, p_l0, c_w0, c_l0])
    sol = root(residual4, y0, method="hybr", options={"xtol": 1e-13, "maxfev": 2000})
    fallback = False
    if np.max(np.abs(sol.fun)) >= opts.tol:
        y = y0.copy()
        d = opts.damping
        for _ in range(opts.fallback_iters):
            r = residual4(y)
            y = np.clip(y - d * r, 0.0, _P_CAP)
        sol = root(residual4, y, method="hybr", options={"xtol": 1e-13, "maxfev": 2000})
        fallback = True
        if np.max(np.abs(sol.fun)) >= opts.tol:
            raise SolverError(
                f"probability system did not converge (last residual {np.max(np.abs(sol.fun)):.3e})",
                residual=float(np.max(np.abs(sol.fun))),
            )
    p_w, p_l, c_w, c_l = np.clip(sol.x, 0.0, _P_CAP)
    x = np.concatenate([np.full(w, p_w), np.full(ell, p_l), np.full(w, c_w), np.full(ell, c_l)])
    return x, fallback


def slot_probabilities(state: ProbabilityState) -> np.ndarray:
    """Six slot-type probabilities: idle, Wi-Fi/LAA success, Wi-Fi/LAA/cross collision.

    For any converged state the six entries sum to one.
    """
    p_w, p_l = state.p_w, state.p_l
    for p in (p_w, p_l, state.c_w, state.c_l):
        if np.any((p < 0.0) | (p > 1.0)):
            raise DomainError("probabilities must lie in [0, 1]")
    comp_w, comp_l = 1.0 - p_w, 1.0 - p_l
    z_w = float(np.prod(comp_w))
    z_l = float(np.prod(comp_l))
    idle = z_w * z_l
    succ_w = float(p_w @ (1.0 - state.c_w))
    succ_l = float(p_l @ (1.0 - state.c_l))
    coll_w = z_l * (1.0 - z_w - z_w * float(np.sum(p_w / comp_w)))
    coll_l = z_w * (1.0 - z_l - z_l * float(np.sum(p_l / comp_l)))
    coll_wl = (1.0 - z_l) * (1.0 - z_w)
    p_t = np.array([idle, succ_w, succ_l, coll_w, coll_l, coll_wl])
    # Cancellation can leave collision entries a few ulp below zero.
    p_t[(p_t < 0.0) & (p_t > -1e-9)] = 0.0
    return p_t
