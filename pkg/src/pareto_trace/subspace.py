"""Gradient-based subspace estimation and geodesic subspace mixing.

The averaged outer product of response gradients defines the directions
along which a response changes most on average; its leading eigenvectors
span a low-dimensional subspace over which ridge surrogates are fit.  Two
responses generally yield different subspaces, so a common one is chosen on
the geodesic between them, maximizing the smaller of the two surrogate
coefficients of determination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DimensionError, DomainError, GeometryError
from .surrogate import PSDQuadraticSurrogate, r_squared


class ActiveSubspace(BaseEstimator, TransformerMixin):
    """Estimate dominant gradient directions from sampled gradients.

    ``fit`` takes an (N, D) block of gradients, averages their outer
    products and eigendecomposes the result in descending order;
    ``transform`` projects unit-cube points onto the leading
    ``n_components`` eigenvectors.
    """

    def __init__(self, n_components: int = 2):
        self.n_components = n_components

    def fit(self, X, y=None):
        G = check_array(X)
        n, d = G.shape
        c = (G.T @ G) / n
        c = (c + c.T) / 2.0
        vals, vecs = np.linalg.eigh(c)
        order = np.argsort(vals)[::-1]
        vals = vals[order]
        vecs = vecs[:, order]
        if np.any(vals < -1e-10 * max(1.0, abs(vals[0]))):
            raise DomainError("outer-product average has a significantly negative eigenvalue")
        vals = np.maximum(vals, 0.0)
        # Deterministic eigenvector signs: largest-magnitude entry positive.
        for j in range(d):
            k = int(np.argmax(np.abs(vecs[:, j])))
            if vecs[k, j] < 0:
                vecs[:, j] = -vecs[:, j]
        self.matrix_ = c
        self.eigenvalues_ = vals
        self.eigenvectors_ = vecs
        self.n_samples_ = n
        self.n_features_in_ = d
        return self

    @property
    def basis_(self) -> np.ndarray:
        check_is_fitted(self, "eigenvectors_")
        return self.eigenvectors_[:, : self.n_components]

    def transform(self, X):
        check_is_fitted(self, "eigenvectors_")
        X = check_array(X)
        return X @ self.basis_


def estimate_c_matrix(gradients: np.ndarray, n_components: int = 2) -> ActiveSubspace:
    """Fit an :class:`ActiveSubspace` on an (N, D) gradient block."""
    return ActiveSubspace(n_components=n_components).fit(gradients)


def _check_orthonormal(basis: np.ndarray, name: str) -> np.ndarray:
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[0] < basis.shape[1]:
        raise DimensionError(f"{name} must be a tall D-by-r matrix")
    gram = basis.T @ basis
    if np.max(np.abs(gram - np.eye(basis.shape[1]))) > 1e-8:
        raise GeometryError(f"{name} columns are not orthonormal")
    return basis


def _orthonormalize(basis: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(basis)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def grassmann_geodesic(x_basis: np.ndarray, y_basis: np.ndarray, s: float) -> np.ndarray:
    """Point on the minimal subspace geodesic from Range(x) to Range(y).

    Computed from the principal angles between the two subspaces: with
    X'Y = V1 cos(T) V2' and H the orthonormal directions completing the
    rotation, the interpolant is X V1 cos(sT) + H sin(sT).  Subspace
    distance along the path is linear in ``s``.  When some principal angle
    is exactly pi/2 the minimal geodesic is not unique; the SVD's
    deterministic choice is used.
    """
    x = _check_orthonormal(x_basis, "x_basis")
    y = _check_orthonormal(y_basis, "y_basis")
    if x.shape != y.shape:
        raise DimensionError("bases must have identical shapes")
    if not 0.0 <= s <= 1.0:
        raise DomainError("interpolation parameter must lie in [0, 1]")
    m = x.T @ y
    v1, cos_t, v2t = np.linalg.svd(m)
    cos_t = np.clip(cos_t, -1.0, 1.0)
    theta = np.arccos(cos_t)
    sin_t = np.sin(theta)
    # Rotation directions orthogonal to Range(x); columns with a zero angle
    # never contribute (sin(s*0) = 0) and are left at zero.
    resid = y @ v2t.T - x @ (v1 * cos_t)
    h = np.zeros_like(resid)
    active = sin_t > 1e-12
    h[:, active] = resid[:, active] / sin_t[active]
    u_s = x @ (v1 * np.cos(s * theta)) + h * np.sin(s * theta)
    return _orthonormalize(u_s)


def subspace_distance(x_basis: np.ndarray, y_basis: np.ndarray) -> float:
    """Geodesic distance: 2-norm of the principal angles."""
    x = _check_orthonormal(x_basis, "x_basis")
    y = _check_orthonormal(y_basis, "y_basis")
    sv = np.linalg.svd(x.T @ y, compute_uv=False)
    angles = np.arccos(np.clip(sv, -1.0, 1.0))
    return float(np.linalg.norm(angles))


@dataclass
class MixedSubspace:
    """A mixing result: common basis, mixing parameter, and per-network fit quality."""

    basis: np.ndarray
    s_star: float
    r2_wifi: float
    r2_laa: float
    surrogate_wifi: PSDQuadraticSurrogate | None = None
    surrogate_laa: PSDQuadraticSurrogate | None = None

    def __post_init__(self):
        _check_orthonormal(self.basis, "basis")


def _mix_objective(s, wifi_basis, laa_basis, unit, f_w, f_l, fit_kwargs):
    u = grassmann_geodesic(wifi_basis, laa_basis, s)
    gamma = unit @ u
    sur_w = PSDQuadraticSurrogate(**fit_kwargs).fit(gamma, f_w)
    sur_l = PSDQuadraticSurrogate(**fit_kwargs).fit(gamma, f_l)
    r2_w = r_squared(sur_w, gamma, f_w)
    r2_l = r_squared(sur_l, gamma, f_l)
    return min(r2_l, r2_w), u, sur_w, sur_l, r2_w, r2_l


def mix_subspaces(
    wifi_basis: np.ndarray,
    laa_basis: np.ndarray,
    thetas_unit: np.ndarray,
    responses_wifi: np.ndarray,
    responses_laa: np.ndarray,
    grid: int = 101,
    fit_max_iter: int = 50_000,
    fit_tol: float = 1e-10,
) -> MixedSubspace:
    """Pick the geodesic mixing parameter balancing both surrogate fits.

    Scans ``grid`` uniform points of [0, 1] (s = 0 at the Wi-Fi basis),
    maximizing min(R2_wifi, R2_laa) of quadratic ridge fits over the mixed
    coordinates, then refines the best bracket by golden-section search.
    A flat profile (spread below 1e-6) deterministically returns s = 0.
    """
    unit = np.asarray(thetas_unit, dtype=float)
    f_w = np.asarray(responses_wifi, dtype=float)
    f_l = np.asarray(responses_laa, dtype=float)
    if unit.shape[0] != f_w.size or f_w.size != f_l.size:
        raise DimensionError("sample and response counts must agree")
    if grid < 2:
        raise DomainError("grid must have at least two points")
    fit_kwargs = {"max_iter": fit_max_iter, "tol": fit_tol}

    s_grid = np.linspace(0.0, 1.0, grid)
    evals = [
        _mix_objective(s, wifi_basis, laa_basis, unit, f_w, f_l, fit_kwargs) for s in s_grid
    ]
    scores = np.array([e[0] for e in evals])
    if scores.max() - scores.min() < 1e-6:
        best = evals[0]
        return MixedSubspace(
            basis=best[1], s_star=0.0, r2_wifi=best[4], r2_laa=best[5],
            surrogate_wifi=best[2], surrogate_laa=best[3],
        )
    k = int(np.argmax(scores))
    lo = s_grid[max(k - 1, 0)]
    hi = s_grid[min(k + 1, grid - 1)]

    # Golden-section refinement of the bracketing cell.
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c_pt = b - inv_phi * (b - a)
    d_pt = a + inv_phi * (b - a)
    f_c = _mix_objective(c_pt, wifi_basis, laa_basis, unit, f_w, f_l, fit_kwargs)
    f_d = _mix_objective(d_pt, wifi_basis, laa_basis, unit, f_w, f_l, fit_kwargs)
    best_s, best_eval = (c_pt, f_c) if f_c[0] >= f_d[0] else (d_pt, f_d)
    if scores[k] > best_eval[0]:
        best_s, best_eval = float(s_grid[k]), evals[k]
    for _ in range(30):
        if abs(b - a) < 1e-4:
            break
        if f_c[0] >= f_d[0]:
            b, d_pt, f_d = d_pt, c_pt, f_c
            c_pt = b - inv_phi * (b - a)
            f_c = _mix_objective(c_pt, wifi_basis, laa_basis, unit, f_w, f_l, fit_kwargs)
        else:
            a, c_pt, f_c = c_pt, d_pt, f_d
            d_pt = a + inv_phi * (b - a)
            f_d = _mix_objective(d_pt, wifi_basis, laa_basis, unit, f_w, f_l, fit_kwargs)
        cand_s, cand = (c_pt, f_c) if f_c[0] >= f_d[0] else (d_pt, f_d)
        if cand[0] > best_eval[0]:
            best_s, best_eval = cand_s, cand
    return MixedSubspace(
        basis=best_eval[1],
        s_star=float(best_s),
        r2_wifi=best_eval[4],
        r2_laa=best_eval[5],
        surrogate_wifi=best_eval[2],
        surrogate_laa=best_eval[3],
    )


def shadow_data(basis: np.ndarray, thetas_unit: np.ndarray, responses: np.ndarray):
    """Pair projected (active) coordinates with responses for plotting."""
    basis = _check_orthonormal(basis, "basis")
    unit = np.asarray(thetas_unit, dtype=float)
    responses = np.asarray(responses, dtype=float)
    if unit.shape[0] != responses.size:
        raise DimensionError("sample and response counts must agree")
    return unit @ basis, responses
