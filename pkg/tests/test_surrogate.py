import itertools

import numpy as np
import pytest

from pareto_trace.exceptions import DimensionError, DomainError
from pareto_trace.surrogate import (
    PSDQuadraticSurrogate,
    fit_psd_quadratic,
    polynomial_r2_table,
    r_squared,
)


class TestFit:
    def test_noiseless_identity_recovery(self, rng):
        coords = rng.uniform(-1, 1, size=(50, 2))
        responses = -np.einsum("ni,ni->n", coords, coords)
        sur = fit_psd_quadratic(coords, responses)
        assert float(np.max(np.abs(sur.Q_ - np.eye(2)))) < 1e-6
        assert float(np.max(np.abs(sur.a_))) < 1e-6
        assert abs(sur.c_) < 1e-6

    def test_concave_data_collapses_to_affine(self, rng):
        # Oracle: grid search over small PSD Q confirms Q = 0 minimizes the
        # loss when the negated response is concave and the data symmetric.
        half = rng.uniform(-1, 1, size=(60, 2))
        coords = np.vstack([half, -half])
        responses = +np.einsum("ni,ni->n", coords, coords)
        target = -responses

        def loss(q_diag):
            q = np.diag(q_diag)
            phi = np.column_stack([np.ones(len(coords)), coords])
            quad = np.einsum("ni,ij,nj->n", coords, q, coords)
            beta, *_ = np.linalg.lstsq(phi, target - quad, rcond=None)
            resid = phi @ beta + quad - target
            return float(resid @ resid)

        grid = np.linspace(0.0, 0.5, 6)
        best = min(itertools.product(grid, grid), key=loss)
        assert best == (0.0, 0.0)

        sur = fit_psd_quadratic(coords, responses)
        assert float(np.max(np.abs(sur.Q_))) < 1e-6

    def test_constant_responses(self, rng):
        coords = rng.uniform(-1, 1, size=(30, 2))
        sur = fit_psd_quadratic(coords, np.full(30, 7.5))
        assert float(np.max(np.abs(sur.Q_))) < 1e-10
        assert float(np.max(np.abs(sur.a_))) < 1e-10
        assert sur.c_ == pytest.approx(-7.5, abs=1e-10)

    def test_exact_recovery_r5(self, rng):
        r = 5
        mat = rng.normal(size=(r, r))
        q_true = mat @ mat.T
        a_true = rng.normal(size=r)
        c_true = rng.normal()
        coords = rng.uniform(-1, 1, size=(200, r))
        responses = -(
            c_true + coords @ a_true + np.einsum("ni,ij,nj->n", coords, q_true, coords)
        )
        sur = fit_psd_quadratic(coords, responses)
        assert float(np.max(np.abs(sur.Q_ - q_true))) < 1e-5
        assert float(np.max(np.abs(sur.a_ - a_true))) < 1e-5
        assert abs(sur.c_ - c_true) < 1e-5

    def test_insufficient_rows(self, rng):
        with pytest.raises(DimensionError):
            fit_psd_quadratic(rng.uniform(-1, 1, size=(5, 3)), np.zeros(5))

    def test_psd_cone_always(self, rng):
        for _ in range(10):
            coords = rng.uniform(-1, 1, size=(40, 3))
            responses = rng.normal(size=40)
            sur = fit_psd_quadratic(coords, responses)
            assert float(np.linalg.eigvalsh(sur.Q_)[0]) >= -1e-8

    def test_first_order_optimality_spot_check(self, rng):
        from pareto_trace.surrogate import _design_matrix, _pack, _project_psd

        coords = rng.uniform(-1, 1, size=(80, 2))
        responses = np.sin(coords[:, 0]) - 0.5 * coords[:, 1] ** 2
        sur = PSDQuadraticSurrogate(standardize=False).fit(coords, responses)
        phi, pairs = _design_matrix(coords)
        target = -responses

        def loss(c, a, q):
            beta = _pack(c, a, q, pairs)
            resid = phi @ beta - target
            return 0.5 * float(resid @ resid)

        base = loss(sur.c_, sur.a_, sur.Q_)
        for _ in range(20):
            dc = rng.choice([-1e-3, 0, 1e-3])
            da = rng.choice([-1e-3, 0, 1e-3], size=2)
            dq = rng.normal(scale=1e-3, size=(2, 2))
            dq = (dq + dq.T) / 2
            perturbed = loss(sur.c_ + dc, sur.a_ + da, _project_psd(sur.Q_ + dq))
            assert perturbed >= base - 1e-8

    def test_monotone_objective(self, rng):
        # The solver history is not exposed; check the documented outcome:
        # final objective never exceeds the warm start's.
        coords = rng.uniform(-1, 1, size=(60, 3))
        responses = rng.normal(size=60)
        sur = fit_psd_quadratic(coords, responses)
        assert np.isfinite(sur.objective_)
        assert sur.converged_


class TestRSquared:
    def test_perfect_fit(self, rng):
        coords = rng.uniform(-1, 1, size=(40, 2))
        responses = -np.einsum("ni,ni->n", coords, coords)
        sur = fit_psd_quadratic(coords, responses)
        assert r_squared(sur, coords, responses) == pytest.approx(1.0, abs=1e-12)

    def test_mean_predictor_scores_zero(self, rng):
        coords = rng.uniform(-1, 1, size=(40, 2))
        responses = rng.normal(size=40)
        sur = PSDQuadraticSurrogate()
        sur.Q_ = np.zeros((2, 2))
        sur.a_ = np.zeros(2)
        sur.c_ = -float(responses.mean())
        sur.dim_ = 2
        assert r_squared(sur, coords, responses) == pytest.approx(0.0, abs=1e-12)

    def test_biased_predictor_negative(self, rng):
        coords = rng.uniform(-1, 1, size=(40, 2))
        responses = rng.normal(size=40)
        sur = PSDQuadraticSurrogate()
        sur.Q_ = np.zeros((2, 2))
        sur.a_ = np.zeros(2)
        sur.c_ = -float(responses.mean()) + 10.0
        sur.dim_ = 2
        assert r_squared(sur, coords, responses) < 0

    def test_zero_variance_rejected(self, rng):
        coords = rng.uniform(-1, 1, size=(10, 2))
        sur = fit_psd_quadratic(coords, rng.normal(size=10))
        with pytest.raises(DomainError):
            r_squared(sur, coords, np.ones(10))


class TestEvalGradHess:
    def test_unit_sphere_values(self):
        sur = PSDQuadraticSurrogate()
        sur.Q_ = np.eye(2)
        sur.a_ = np.zeros(2)
        sur.c_ = 0.0
        sur.dim_ = 2
        e1 = np.array([1.0, 0.0])
        assert sur.value(e1) == pytest.approx(-1.0)
        assert np.allclose(sur.gradient(e1), [-2.0, 0.0])
        assert np.allclose(sur.hessian(), -2.0 * np.eye(2))

    def test_gradient_vs_forward_difference(self, rng):
        coords = rng.uniform(-1, 1, size=(50, 3))
        responses = -(coords @ np.array([0.3, -1.0, 0.5]) + np.einsum("ni,ni->n", coords, coords))
        sur = fit_psd_quadratic(coords, responses)
        delta = 1e-6
        for _ in range(20):
            point = rng.uniform(-1, 1, 3)
            base = sur.value(point)
            fd = np.array(
                [
                    (sur.value(point + delta * np.eye(3)[i]) - base) / delta
                    for i in range(3)
                ]
            )
            assert float(np.max(np.abs(fd - sur.gradient(point)))) < 1e-5

    def test_hessian_constant(self, rng):
        coords = rng.uniform(-1, 1, size=(30, 2))
        sur = fit_psd_quadratic(coords, rng.normal(size=30))
        h = sur.hessian()
        assert np.array_equal(h, sur.hessian())
        assert np.allclose(h, -2.0 * sur.Q_)

    def test_dimension_mismatch(self, rng):
        coords = rng.uniform(-1, 1, size=(30, 2))
        sur = fit_psd_quadratic(coords, rng.normal(size=30))
        with pytest.raises(DimensionError):
            sur.gradient(np.zeros(3))


def test_polynomial_r2_table(rng):
    coords = rng.uniform(-1, 1, size=(100, 2))
    responses = coords[:, 0] ** 3 + coords[:, 1]
    table = polynomial_r2_table(coords, responses)
    assert set(table) == {2, 3, 4, 5}
    assert table[3] > table[2]
    assert table[3] == pytest.approx(1.0, abs=1e-10)
