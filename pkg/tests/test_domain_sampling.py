import numpy as np
import pytest

from pareto_trace.domain import (
    NOMINAL_THETA,
    ParameterDomain,
    UnitCubeScaler,
    default_domain,
)
from pareto_trace.exceptions import DomainError
from pareto_trace.sampling import evaluate_batch, fd_gradient, sample_uniform


class TestScaling:
    def test_log_endpoints(self):
        dom = ParameterDomain(lower=np.array([8.0]), upper=np.array([1024.0]))
        assert dom.scale == ["log"]
        assert dom.to_unit(np.array([8.0]))[0] == pytest.approx(-1.0, abs=1e-14)
        assert dom.to_unit(np.array([1024.0]))[0] == pytest.approx(1.0, abs=1e-14)

    def test_log_geometric_center(self):
        dom = ParameterDomain(lower=np.array([8.0]), upper=np.array([1024.0]))
        center = np.sqrt(8.0 * 1024.0)
        assert dom.to_unit(np.array([center]))[0] == pytest.approx(0.0, abs=1e-14)

    def test_linear_fallback_midpoint(self):
        dom = ParameterDomain(lower=np.array([0.0]), upper=np.array([8.0]))
        assert dom.scale == ["linear"]
        assert dom.to_unit(np.array([4.0]))[0] == pytest.approx(0.0, abs=1e-15)

    def test_default_domain_scale_modes(self, domain):
        # Zero lower bounds force the linear map; everything else is log.
        assert [domain.scale[i] for i in (2, 3, 13)] == ["linear"] * 3
        assert domain.scale.count("log") == 14

    def test_round_trip(self, domain, rng):
        unit = rng.uniform(-1, 1, size=(1000, domain.dim))
        theta = domain.from_unit(unit)
        back = domain.from_unit(domain.to_unit(theta))
        rel = np.abs(back - theta) / np.maximum(np.abs(theta), 1e-300)
        assert float(rel.max()) < 1e-12

    def test_out_of_bounds_naming(self, domain):
        theta = NOMINAL_THETA.copy()
        theta[0] = 4.0
        with pytest.raises(DomainError, match=r"wifi_min_cw.*outside"):
            domain.validate(theta)

    def test_scaler_estimator_api(self, domain, rng):
        scaler = UnitCubeScaler(domain)
        theta = domain.from_unit(rng.uniform(-1, 1, size=(5, domain.dim)))
        unit = scaler.fit(theta).transform(theta)
        assert np.all(np.abs(unit) <= 1)
        assert np.allclose(scaler.inverse_transform(unit), theta, rtol=1e-12)
        params = scaler.get_params()
        assert "domain" in params


class TestSampleUniform:
    def test_containment(self, domain):
        s = sample_uniform(domain, 1, seed=7)
        assert s.thetas_unit.shape == (1, domain.dim)
        assert np.all(np.abs(s.thetas_unit) <= 1)

    def test_determinism(self, domain):
        a = sample_uniform(domain, 50, seed=42)
        b = sample_uniform(domain, 50, seed=42)
        assert np.array_equal(a.thetas_unit, b.thetas_unit)
        assert np.array_equal(a.thetas_raw, b.thetas_raw)

    def test_law_of_large_numbers(self, domain):
        s = sample_uniform(domain, 10_000, seed=3)
        means = s.thetas_unit.mean(axis=0)
        assert np.all(np.abs(means) < 0.05)


class TestFdGradient:
    def test_linear_exact(self, rng):
        w = rng.normal(size=6)
        grad = fd_gradient(lambda u: float(w @ u), np.zeros(6), delta=1e-6)
        assert np.allclose(grad, w, atol=1e-9)

    def test_quadratic_forward_bias(self):
        e1 = np.zeros(4)
        e1[0] = 1.0
        grad = fd_gradient(lambda u: float(u @ u), e1, delta=1e-6)
        assert grad[0] == pytest.approx(2.0 + 1e-6, abs=1e-9)
        assert np.allclose(grad[1:], 1e-6, atol=1e-9)

    def test_constant_zero(self):
        grad = fd_gradient(lambda u: 5.0, np.zeros(3), delta=1e-6)
        assert np.all(grad == 0)

    def test_error_bound_on_quadratics(self, rng):
        # Forward-difference error on a quadratic is delta * |H|/2 plus rounding.
        delta = 1e-6
        for _ in range(5):
            mat = rng.normal(size=(5, 5))
            hess = mat + mat.T
            b = rng.normal(size=5)
            point = rng.uniform(-1, 1, 5)

            def f(u):
                return float(0.5 * u @ hess @ u + b @ u)

            grad = fd_gradient(f, point, delta=delta)
            exact = hess @ point + b
            bound = 10 * delta * (1 + float(np.max(np.abs(hess).sum(axis=1))))
            assert float(np.max(np.abs(grad - exact))) <= bound


class TestEvaluateBatch:
    def test_symmetric_rows_equal_throughputs(self, domain, model, rng):
        unit = rng.uniform(-1, 1, size=(10, domain.dim))
        unit[:, 1] = unit[:, 0]
        unit[:, 3] = unit[:, 2]
        samples = sample_uniform(domain, 10, seed=0)
        samples.thetas_unit = unit
        samples.thetas_raw = domain.from_unit(unit)
        filled = evaluate_batch(samples, model)
        assert np.allclose(filled.responses_wifi, filled.responses_laa, atol=1e-9)

    def test_evaluation_count_with_gradients(self, domain, rng):
        calls = {"n": 0}

        class CountingModel:
            domain_ = domain

            def evaluate_unit(self, u):
                calls["n"] += 1

                class Out:
                    f_wifi = 1.0
                    f_laa = 2.0

                    class state:
                        fallback = False

                return Out()

        samples = sample_uniform(domain, 100, seed=1)
        evaluate_batch(samples, CountingModel(), with_gradients=True, delta=1e-6)
        assert calls["n"] == 100 * (domain.dim + 1)

    def test_parallel_matches_serial(self, domain, model):
        samples = sample_uniform(domain, 12, seed=5)
        serial = evaluate_batch(samples, model, with_gradients=True, n_jobs=1)
        parallel = evaluate_batch(samples, model, with_gradients=True, n_jobs=2)
        assert np.array_equal(serial.responses_wifi, parallel.responses_wifi)
        assert np.array_equal(serial.responses_laa, parallel.responses_laa)
        assert np.array_equal(serial.gradients_wifi, parallel.gradients_wifi)
        assert np.array_equal(serial.gradients_laa, parallel.gradients_laa)
