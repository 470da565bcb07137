import numpy as np
import pytest

from pareto_trace.exceptions import DomainError
from pareto_trace.fronts import (
    conditional_front,
    geodesic_front,
    inactive_endpoints,
    linear_front,
    nondominated,
    nondominated_bruteforce,
)
from pareto_trace.geometry import InactiveSampler, zonotope_vertices
from pareto_trace.trace import TraceCurve


def identity_basis(d):
    u = np.zeros((d, 2))
    u[0, 0] = 1.0
    u[1, 1] = 1.0
    return u


def ridge_stub(stub_model_factory, d):
    """Exact-ridge pair: responses depend only on the two active coordinates."""

    def f_w(u):
        return 4.0 - (u[0] - 0.5) ** 2 - 0.3 * u[1] ** 2

    def f_l(u):
        return 4.0 - 0.3 * u[0] ** 2 - (u[1] - 0.5) ** 2

    return stub_model_factory(f_w, f_l, dim=d)


def straight_trace(n=11):
    t = np.linspace(0, 1, n)
    points = np.column_stack([0.5 - 0.5 * t, 0.5 * t])
    return TraceCurve(t_grid=t, points=points, feasible=np.ones(n, dtype=bool))


class TestInactiveEndpoints:
    def test_flat_objective_spread(self, stub_model_factory):
        d = 6
        stub = ridge_stub(stub_model_factory, d)
        basis = identity_basis(d)
        sampler = InactiveSampler(basis)
        gamma0 = np.array([0.5, 0.0])
        zeta0, zeta1 = inactive_endpoints(stub, basis, gamma0, np.array([0.0, 0.5]), multistart=4, seed=0)
        lift0 = sampler.lift(gamma0, zeta0)
        # Objective is constant in the inactive coordinates: every restart
        # must report the same value.
        values = []
        for s in range(4):
            z = sampler.sample(gamma0, 1, seed=s)[0]
            values.append(stub.throughput_unit(sampler.lift(gamma0, z))[0])
        assert float(np.ptp(values)) < 1e-10
        assert float(np.max(np.abs(lift0))) <= 1.0 + 1e-9

    def test_lifts_in_domain(self, stub_model_factory, rng):
        d = 8
        basis = np.linalg.qr(rng.normal(size=(d, 2)))[0]
        zono = zonotope_vertices(basis)

        def f(u):
            return float(np.sum(u))

        stub = stub_model_factory(f, f, dim=d)
        g0 = 0.5 * zono.vertices[0]
        g1 = 0.5 * zono.vertices[1]
        z0, z1 = inactive_endpoints(stub, basis, g0, g1, multistart=3, seed=1)
        sampler = InactiveSampler(basis)
        assert float(np.max(np.abs(sampler.lift(g0, z0)))) <= 1.0 + 1e-9
        assert float(np.max(np.abs(sampler.lift(g1, z1)))) <= 1.0 + 1e-9

    def test_beats_random_feasible_draws(self, small_model):
        from pareto_trace.domain import default_domain

        d = default_domain().dim
        basis = identity_basis(d)
        gamma0 = np.array([0.2, 0.1])
        gamma1 = np.array([-0.1, 0.3])
        z0, _ = inactive_endpoints(small_model, basis, gamma0, gamma1, multistart=3, seed=0)
        sampler = InactiveSampler(basis)
        best = small_model.throughput_unit(sampler.lift(gamma0, z0))[0]
        draws = sampler.sample(gamma0, 100, seed=123)
        for z in draws:
            assert best >= small_model.throughput_unit(sampler.lift(gamma0, z))[0] - 1e-9


class TestGeodesicFront:
    def test_endpoint_matches_model(self, stub_model_factory):
        d = 6
        stub = ridge_stub(stub_model_factory, d)
        basis = identity_basis(d)
        tr = straight_trace()
        sampler = InactiveSampler(basis)
        zeta0 = sampler.sample(tr.points[0], 1, seed=0)[0]
        zeta1 = sampler.sample(tr.points[-1], 1, seed=1)[0]
        front = geodesic_front(stub, basis, tr, zeta0, zeta1, n_t=5)
        expected = stub.throughput_unit(sampler.lift(tr.points[0], zeta0))
        assert front.f_wifi[0] == pytest.approx(expected[0], abs=1e-12)
        assert front.f_laa[0] == pytest.approx(expected[1], abs=1e-12)

    def test_row_count(self, stub_model_factory):
        d = 5
        stub = ridge_stub(stub_model_factory, d)
        basis = identity_basis(d)
        tr = straight_trace(31)
        zeros = np.zeros(d - 2)
        front = geodesic_front(stub, basis, tr, zeros, zeros, n_t=15)
        assert front.t_grid.size == 15
        assert front.kind == "geodesic"

    def test_clips_to_feasible_span(self, stub_model_factory):
        d = 5
        stub = ridge_stub(stub_model_factory, d)
        basis = identity_basis(d)
        tr = straight_trace(21)
        tr.feasible[:5] = False
        zeros = np.zeros(d - 2)
        with pytest.warns(RuntimeWarning, match="clipped"):
            front = geodesic_front(stub, basis, tr, zeros, zeros, n_t=5)
        assert front.t_grid[0] == pytest.approx(tr.t_grid[5])


class TestLinearFront:
    def test_identical_endpoints_constant(self, stub_model_factory):
        stub = ridge_stub(stub_model_factory, 6)
        theta = np.full(6, 0.25)
        front = linear_front(stub, theta, theta, n_t=7)
        assert float(np.ptp(front.f_wifi)) == 0.0
        assert float(np.ptp(front.f_laa)) == 0.0

    def test_first_row_is_left_endpoint(self, stub_model_factory, rng):
        stub = ridge_stub(stub_model_factory, 6)
        theta0 = rng.uniform(-1, 1, 6)
        theta1 = rng.uniform(-1, 1, 6)
        front = linear_front(stub, theta0, theta1, n_t=5)
        assert front.f_wifi[0] == pytest.approx(stub.throughput_unit(theta0)[0], abs=1e-12)

    def test_segment_stays_in_cube(self, stub_model_factory, rng):
        calls = []

        def f(u):
            calls.append(float(np.max(np.abs(u))))
            return 1.0

        stub = stub_model_factory(f, f, dim=4)
        linear_front(stub, rng.uniform(-1, 1, 4), rng.uniform(-1, 1, 4), n_t=9)
        assert max(calls) <= 1.0

    def test_rejects_out_of_cube_endpoints(self, stub_model_factory):
        stub = ridge_stub(stub_model_factory, 4)
        with pytest.raises(DomainError):
            linear_front(stub, np.full(4, 2.0), np.zeros(4), n_t=3)


class TestConditionalFront:
    def test_exact_ridge_zero_spread(self, stub_model_factory):
        d = 6
        stub = ridge_stub(stub_model_factory, d)
        basis = identity_basis(d)
        front = conditional_front(stub, basis, straight_trace(), n_t=5, n_inactive=10, seed=0)
        assert float(np.max(front.f_wifi_max - front.f_wifi_min)) < 1e-12
        assert float(np.max(front.f_laa_max - front.f_laa_min)) < 1e-12

    def test_mean_within_spread(self, stub_model_factory, rng):
        d = 7
        w = rng.normal(size=d)

        def f_w(u):
            return float(w @ u)

        def f_l(u):
            return float(np.sum(u**2))

        stub = stub_model_factory(f_w, f_l, dim=d)
        basis = identity_basis(d)
        front = conditional_front(stub, basis, straight_trace(), n_t=5, n_inactive=15, seed=1)
        assert np.all(front.f_wifi >= front.f_wifi_min - 1e-12)
        assert np.all(front.f_wifi <= front.f_wifi_max + 1e-12)
        assert np.all(front.f_laa >= front.f_laa_min - 1e-12)
        assert np.all(front.f_laa <= front.f_laa_max + 1e-12)

    def test_doubling_inactive_shifts_less_than_half_spread(self, stub_model_factory, rng):
        d = 7
        w = rng.normal(size=d)

        def f_w(u):
            return float(w @ u)

        def f_l(u):
            return float(-np.sum(u**2))

        stub = stub_model_factory(f_w, f_l, dim=d)
        basis = identity_basis(d)
        tr = straight_trace()
        front_a = conditional_front(stub, basis, tr, n_t=5, n_inactive=25, seed=3)
        front_b = conditional_front(stub, basis, tr, n_t=5, n_inactive=50, seed=3)
        half_spread_w = 0.5 * (front_a.f_wifi_max - front_a.f_wifi_min)
        half_spread_l = 0.5 * (front_a.f_laa_max - front_a.f_laa_min)
        assert np.all(np.abs(front_a.f_wifi - front_b.f_wifi) <= half_spread_w + 1e-12)
        assert np.all(np.abs(front_a.f_laa - front_b.f_laa) <= half_spread_l + 1e-12)


class TestNondominated:
    def test_singleton(self):
        assert nondominated(np.array([[1.0, 1.0]])).tolist() == [0]

    def test_three_point_example(self):
        keep = nondominated(np.array([[1.0, 2.0], [2.0, 1.0], [0.5, 0.5]]))
        assert keep.tolist() == [0, 1]

    def test_duplicates_keep_first(self):
        keep = nondominated(np.array([[1.0, 1.0], [1.0, 1.0], [0.5, 2.0]]))
        assert keep.tolist() == [0, 2]

    def test_antichain_output(self, rng):
        pts = rng.uniform(0, 1, size=(500, 2))
        keep = nondominated(pts)
        sub = pts[keep]
        for i in range(len(sub)):
            dominated = np.all(sub >= sub[i], axis=1) & np.any(sub > sub[i], axis=1)
            assert not dominated.any()

    def test_matches_bruteforce_random(self, rng):
        for _ in range(20):
            pts = rng.uniform(0, 1, size=(1000, 2))
            assert np.array_equal(nondominated(pts), nondominated_bruteforce(pts))

    def test_matches_bruteforce_with_ties(self, rng):
        for _ in range(20):
            pts = np.round(rng.uniform(0, 1, size=(400, 2)), 1)
            assert np.array_equal(nondominated(pts), nondominated_bruteforce(pts))
