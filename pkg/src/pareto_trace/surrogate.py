"""Convex quadratic surrogates fit under a positive-semidefinite constraint.

The surrogate models the *negated* response: with throughput f, the fit is
-f(x) ~ c + a'x + x'Qx with Q constrained to the PSD cone, so a concave
throughput maps to a convex quadratic.  The fit is an accelerated projected
gradient (FISTA with restart) on the least-squares objective, warm-started
from the PSD-projected unconstrained solution; coordinates are standardized
internally and the coefficients mapped back.
"""

from __future__ import annotations

import itertools
import warnings

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .exceptions import DimensionError, DomainError


def _num_coefficients(r: int) -> int:
    return 1 + r + r * (r + 1) // 2


def _project_psd(q: np.ndarray, floor: float = 0.0) -> np.ndarray:
    vals, vecs = np.linalg.eigh((q + q.T) / 2.0)
    vals = np.maximum(vals, floor)
    return (vecs * vals) @ vecs.T


class PSDQuadraticSurrogate(RegressorMixin, BaseEstimator):
    """Least-squares quadratic with PSD Hessian, in the negated-response convention.

    Parameters
    ----------
    max_iter : iteration cap for the projected-gradient solve.
    tol : relative objective-decrease threshold for termination.
    standardize : center/scale coordinates to unit RMS internally.
    """

    def __init__(self, max_iter: int = 50_000, tol: float = 1e-10, standardize: bool = True):
        self.max_iter = max_iter
        self.tol = tol
        self.standardize = standardize

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        n, r = X.shape
        if n < _num_coefficients(r):
            raise DimensionError(
                f"need at least {_num_coefficients(r)} samples to fit a {r}-dimensional quadratic"
            )
        target = -np.asarray(y, dtype=float)

        if self.standardize:
            mean = X.mean(axis=0)
            centered = X - mean
            scale = np.sqrt(np.mean(centered**2, axis=0))
            scale[scale < 1e-12] = 1.0
        else:
            mean = np.zeros(r)
            scale = np.ones(r)
        Z = (X - mean) / scale

        q, a, c, info = _fit_psd_quadratic_core(Z, target, self.max_iter, self.tol)

        # Map coefficients from standardized coordinates back to the originals.
        s_inv = 1.0 / scale
        q_orig = (q * s_inv[None, :]) * s_inv[:, None]
        a_orig = s_inv * a - 2.0 * q_orig @ mean
        c_orig = c - a @ (s_inv * mean) + mean @ q_orig @ mean

        self.Q_ = _project_psd(q_orig, floor=0.0)
        self.a_ = a_orig
        self.c_ = float(c_orig)
        self.dim_ = r
        self.n_iter_ = info["n_iter"]
        self.objective_ = info["objective"]
        self.converged_ = info["converged"]
        if not info["converged"]:
            warnings.warn(
                f"projected-gradient fit stopped at iteration cap "
                f"(final objective {info['objective']:.6e})",
                RuntimeWarning,
            )
        return self

    def _quadratic(self, X):
        return self.c_ + X @ self.a_ + np.einsum("ni,ij,nj->n", X, self.Q_, X)

    def predict(self, X):
        """Predicted responses (back in the original, un-negated convention)."""
        check_is_fitted(self, "Q_")
        X = check_array(X)
        if X.shape[1] != self.dim_:
            raise DimensionError(f"expected {self.dim_} coordinates, got {X.shape[1]}")
        return -self._quadratic(X)

    def value(self, point) -> float:
        """Predicted response at a single point."""
        return float(self.predict(np.atleast_2d(point))[0])

    def gradient(self, point) -> np.ndarray:
        """Gradient of the predicted response at a single point."""
        check_is_fitted(self, "Q_")
        point = np.asarray(point, dtype=float)
        if point.shape != (self.dim_,):
            raise DimensionError(f"expected a point of dimension {self.dim_}")
        return -(self.a_ + 2.0 * self.Q_ @ point)

    def hessian(self) -> np.ndarray:
        """Constant Hessian of the predicted response (negative semidefinite)."""
        check_is_fitted(self, "Q_")
        return -2.0 * self.Q_


def fit_psd_quadratic(coords, responses, max_iter: int = 50_000, tol: float = 1e-10) -> PSDQuadraticSurrogate:
    """Functional wrapper around :class:`PSDQuadraticSurrogate`."""
    return PSDQuadraticSurrogate(max_iter=max_iter, tol=tol).fit(coords, responses)


_SQRT2 = np.sqrt(2.0)


def _design_matrix(Z: np.ndarray):
    """Monomial basis [1, z_i, svec(z z')] matching the packed coefficients.

    Off-diagonal quadratic monomials carry the sqrt(2) weight of the
    isometric symmetric vectorization, so the Euclidean geometry of the
    packed coefficient vector equals the Frobenius geometry of Q and the
    eigenvalue-clamping projection is the exact Euclidean projection.
    """
    n, r = Z.shape
    pairs = list(itertools.combinations_with_replacement(range(r), 2))
    cols = [np.ones(n)] + [Z[:, i] for i in range(r)]
    for i, j in pairs:
        w = 1.0 if i == j else _SQRT2
        cols.append(w * Z[:, i] * Z[:, j])
    return np.column_stack(cols), pairs


def _pack(c, a, q, pairs):
    tri = [q[i, j] * (1.0 if i == j else _SQRT2) for i, j in pairs]
    return np.concatenate([[c], a, tri])


def _unpack(beta, r, pairs):
    c = beta[0]
    a = beta[1 : 1 + r]
    q = np.zeros((r, r))
    for (i, j), v in zip(pairs, beta[1 + r :]):
        q_ij = v if i == j else v / _SQRT2
        q[i, j] = q_ij
        q[j, i] = q_ij
    return c, a, q


def _fit_psd_quadratic_core(Z, target, max_iter, tol):
    """FISTA on the stacked coefficient vector with PSD projection of the Q block."""
    n, r = Z.shape
    phi, pairs = _design_matrix(Z)
    gram = phi.T @ phi
    lipschitz = float(np.linalg.eigvalsh(gram)[-1])
    if lipschitz <= 0.0:
        lipschitz = 1.0
    step = 1.0 / lipschitz
    phi_t_y = phi.T @ target

    def objective(beta):
        res = phi @ beta - target
        return 0.5 * float(res @ res)

    def project(beta):
        c, a, q = _unpack(beta, r, pairs)
        return _pack(c, a, _project_psd(q), pairs)

    beta_ls, *_ = np.linalg.lstsq(phi, target, rcond=None)
    x = project(beta_ls)
    y = x.copy()
    t_momentum = 1.0
    obj = objective(x)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad = gram @ y - phi_t_y
        x_new = project(y - step * grad)
        obj_new = objective(x_new)
        if obj_new > obj:
            # Momentum restart keeps the objective non-increasing.
            y = x.copy()
            t_momentum = 1.0
            grad = gram @ y - phi_t_y
            x_new = project(y - step * grad)
            obj_new = objective(x_new)
            if obj_new > obj:
                x_new, obj_new = x, obj
        rel_decrease = (obj - obj_new) / max(obj, 1e-300)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_momentum**2))
        y = x_new + ((t_momentum - 1.0) / t_new) * (x_new - x)
        x, obj, t_momentum = x_new, obj_new, t_new
        if rel_decrease < tol:
            converged = True
            break
    c, a, q = _unpack(x, r, pairs)
    return q, a, c, {"n_iter": it, "objective": obj, "converged": converged}


def r_squared(surrogate: PSDQuadraticSurrogate, coords, responses) -> float:
    """Coefficient of determination of the surrogate on coordinate-response pairs."""
    coords = np.asarray(coords, dtype=float)
    responses = np.asarray(responses, dtype=float)
    if responses.size < 2:
        raise DomainError("need at least two responses")
    ss_tot = float(np.sum((responses - responses.mean()) ** 2))
    if ss_tot <= 0.0:
        raise DomainError("responses have zero variance")
    pred = surrogate.predict(coords)
    ss_res = float(np.sum((responses - pred) ** 2))
    return 1.0 - ss_res / ss_tot


def polynomial_r2_table(coords, responses, degrees=(2, 3, 4, 5)) -> dict[int, float]:
    """Diagnostic R^2 of ordinary least-squares polynomial fits by degree."""
    from sklearn.linear_model import LinearRegression
    from sklearn.pipeline import make_pipeline
    from sklearn.preprocessing import PolynomialFeatures

    coords = np.asarray(coords, dtype=float)
    responses = np.asarray(responses, dtype=float)
    table = {}
    for degree in degrees:
        pipe = make_pipeline(PolynomialFeatures(degree=degree), LinearRegression())
        pipe.fit(coords, responses)
        table[int(degree)] = float(pipe.score(coords, responses))
    return table
