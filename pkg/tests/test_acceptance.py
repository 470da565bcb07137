"""Acceptance suite: one test per release criterion, each printing a
pass/fail line (run with ``pytest tests/test_acceptance.py -v -s``).

Criterion 7 executes the full desk-scale study (N = 2,000, 17 parameters,
fixed seed) with the shipped default configuration and checks it against
the quantitative targets; expect several minutes of runtime.
"""

import json
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from pareto_trace.config import RunConfig, config_from_dict
from pareto_trace.domain import default_domain
from pareto_trace.fronts import nondominated, nondominated_bruteforce
from pareto_trace.mac import slot_probabilities, solve_probability_system
from pareto_trace.model import CoexistenceModel, mac_parameters_from_theta
from pareto_trace.pipeline import Pipeline
from pareto_trace.sampling import fd_gradient, sample_uniform
from pareto_trace.subspace import estimate_c_matrix
from pareto_trace.surrogate import PSDQuadraticSurrogate, fit_psd_quadratic
from pareto_trace.trace import UnitCube, ode_trace, quadratic_trace


def report(name: str, ok: bool, detail: str):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_criterion_1_slot_normalization():
    domain = default_domain()
    scenario = RunConfig().scenario
    rng = np.random.default_rng(11)
    start = time.perf_counter()
    worst = 0.0
    in_range = True
    for _ in range(1000):
        theta = domain.from_unit(rng.uniform(-1, 1, domain.dim))
        state = solve_probability_system(mac_parameters_from_theta(theta, scenario))
        p_t = slot_probabilities(state)
        worst = max(worst, abs(float(p_t.sum()) - 1.0))
        probs = np.concatenate([state.p_w, state.p_l, state.c_w, state.c_l, p_t])
        in_range = in_range and bool(np.all((probs >= 0.0) & (probs <= 1.0)))
    elapsed = time.perf_counter() - start
    report(
        "criterion 1 (slot normalization)",
        worst < 1e-10 and in_range and elapsed < 30.0,
        f"worst |sum-1| = {worst:.2e}, ranges ok = {in_range}, {elapsed:.1f}s for 1000 solves",
    )


def test_criterion_2_solver_robustness():
    domain = default_domain()
    scenario = RunConfig().scenario  # W = L = 6
    rng = np.random.default_rng(12)
    thetas = domain.from_unit(rng.uniform(-1, 1, size=(1000, domain.dim)))
    converged = 0
    start = time.perf_counter()
    for theta in thetas:
        try:
            state = solve_probability_system(mac_parameters_from_theta(theta, scenario))
            if state.residual_norm < 1e-8:
                converged += 1
        except Exception:
            pass
    mean_ms = (time.perf_counter() - start) / 1000 * 1e3
    report(
        "criterion 2 (solver robustness)",
        converged >= 990 and mean_ms < 5.0,
        f"{converged}/1000 converged below 1e-8, mean solve {mean_ms:.2f} ms",
    )


def test_criterion_3_ridge_recovery():
    d = 17
    rng = np.random.default_rng(13)
    w = rng.normal(size=d)
    w /= np.linalg.norm(w)

    def f(u):
        return float((w @ u) ** 2)

    samples = sample_uniform(default_domain(), 500, seed=13)
    grads = np.vstack([fd_gradient(f, row, delta=1e-6) for row in samples.thetas_unit])
    est = estimate_c_matrix(grads)
    align = abs(float(est.eigenvectors_[:, 0] @ w))
    ratio = float(est.eigenvalues_[1] / est.eigenvalues_[0])
    report(
        "criterion 3 (ridge recovery)",
        align > 0.999 and ratio < 1e-6,
        f"|cos| = {align:.6f}, lambda2/lambda1 = {ratio:.2e}",
    )


def test_criterion_4_psd_fit_recovery():
    rng = np.random.default_rng(14)
    r = 5
    mat = rng.normal(size=(r, r))
    q_true = mat @ mat.T
    a_true = rng.normal(size=r)
    c_true = rng.normal()
    coords = rng.uniform(-1, 1, size=(200, r))
    responses = -(c_true + coords @ a_true + np.einsum("ni,ij,nj->n", coords, q_true, coords))
    sur = fit_psd_quadratic(coords, responses)
    err = max(
        float(np.max(np.abs(sur.Q_ - q_true))),
        float(np.max(np.abs(sur.a_ - a_true))),
        abs(sur.c_ - c_true),
    )
    half = rng.uniform(-1, 1, size=(100, r))
    sym = np.vstack([half, -half])
    concave = fit_psd_quadratic(sym, +np.einsum("ni,ni->n", sym, sym))
    q_norm = float(np.max(np.abs(concave.Q_)))
    report(
        "criterion 4 (PSD fit recovery)",
        err < 1e-5 and q_norm < 1e-6,
        f"max coefficient error {err:.2e}, concave-fit |Q| = {q_norm:.2e}",
    )


def test_criterion_5_trace_correctness():
    rng = np.random.default_rng(15)

    def rand_sur(r):
        mat = rng.normal(size=(r, r))
        sur = PSDQuadraticSurrogate()
        sur.Q_ = mat @ mat.T + 0.3 * np.eye(r)
        sur.a_ = rng.normal(size=r)
        sur.c_ = 0.0
        sur.dim_ = r
        return sur

    sur_w, sur_l = rand_sur(3), rand_sur(3)
    grid = np.linspace(0, 1, 100)
    tr = quadratic_trace(sur_w, sur_l, grid)
    stationarity = max(
        float(np.max(np.abs((1 - t) * sur_w.gradient(tr.points[i]) + t * sur_l.gradient(tr.points[i]))))
        for i, t in enumerate(grid)
    )
    ode = ode_trace(sur_w, sur_l, grid, step=1e-3)
    ode_err = float(np.max(np.abs(ode.points - tr.points)))

    d, r = 17, 2
    basis = np.linalg.qr(rng.normal(size=(d, r)))[0]
    red_w, red_l = rand_sur(r), rand_sur(r)
    lift_w, lift_l = PSDQuadraticSurrogate(), PSDQuadraticSurrogate()
    lift_w.Q_, lift_w.a_, lift_w.c_, lift_w.dim_ = basis @ red_w.Q_ @ basis.T, basis @ red_w.a_, 0.0, d
    lift_l.Q_, lift_l.a_, lift_l.c_, lift_l.dim_ = basis @ red_l.Q_ @ basis.T, basis @ red_l.a_, 0.0, d
    reduced = quadratic_trace(red_w, red_l, grid)
    full = quadratic_trace(lift_w, lift_l, grid, region=UnitCube(d))
    lift_err = float(np.max(np.abs(full.points @ basis - reduced.points)))
    report(
        "criterion 5 (trace correctness)",
        stationarity < 1e-8 and ode_err < 1e-6 and lift_err < 1e-8,
        f"stationarity {stationarity:.2e}, ode vs closed form {ode_err:.2e}, "
        f"lift/projection {lift_err:.2e}",
    )


def test_criterion_6_nondominated_oracle():
    rng = np.random.default_rng(16)
    mismatches = 0
    for trial in range(100):
        pts = rng.uniform(0, 1, size=(1000, 2))
        if trial % 3 == 0:
            pts = np.round(pts, 2)  # inject ties
        if not np.array_equal(nondominated(pts), nondominated_bruteforce(pts)):
            mismatches += 1
    report(
        "criterion 6 (non-dominated sorting)",
        mismatches == 0,
        f"{100 - mismatches}/100 random sets of 1000 points match the quadratic oracle",
    )


@pytest.fixture(scope="module")
def desk_scale_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("desk")
    config = config_from_dict({"output_dir": str(out)})  # shipped defaults: N=2000, r=2, seed 0
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        Pipeline(config, n_jobs=1).run()
    return out, time.perf_counter() - start


def test_criterion_7_desk_scale_end_to_end(desk_scale_run):
    out, elapsed = desk_scale_run
    sub = json.loads((out / "subspace.json").read_text())
    r2_w, r2_l = sub["r2_wifi"], sub["r2_laa"]

    cond = np.genfromtxt(out / "condition_profile.csv", delimiter=",", skip_header=1)
    mid = cond[np.argmin(np.abs(cond[:, 0] - 0.5))]
    cond_ratio_ok = mid[2] >= 10.0 * mid[1]

    samples = np.genfromtxt(out / "samples.csv", delimiter=",", skip_header=1)
    best_w = samples[:, -2].max()
    best_l = samples[:, -1].max()
    geo = np.genfromtxt(out / "fronts_geodesic.csv", delimiter=",", skip_header=1)
    endpoint_w = geo[0, 1]
    endpoint_l = geo[-1, 2]
    endpoints_ok = endpoint_w >= 0.95 * best_w and endpoint_l >= 0.95 * best_l

    ok = (
        r2_w >= 0.70
        and r2_l >= 0.70
        and abs(r2_w - r2_l) < 0.10
        and cond_ratio_ok
        and endpoints_ok
        and elapsed < 900.0
    )
    report(
        "criterion 7 (desk-scale end-to-end)",
        ok,
        f"R2 = ({r2_w:.3f}, {r2_l:.3f}), condition full/reduced at t=0.5 = "
        f"{mid[2]:.1f}/{mid[1]:.1f}, geodesic endpoints ({endpoint_w:.2f}, {endpoint_l:.2f}) vs "
        f"95% sample maxima ({0.95 * best_w:.2f}, {0.95 * best_l:.2f}), runtime {elapsed:.0f}s",
    )


def test_criterion_8_determinism(tmp_path):
    from tests.test_pipeline_cli import read_all_bytes, smoke_config

    digests = []
    for i, threads in enumerate((1, 1, 2)):
        out = tmp_path / f"rep{i}"
        config = smoke_config(out, threads=threads)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            Pipeline(config, n_jobs=threads).run()
        digests.append(read_all_bytes(out))
    identical = digests[0] == digests[1] and digests[0] == digests[2]
    report(
        "criterion 8 (determinism)",
        identical,
        "two repeat runs and a 2-worker run produced byte-identical artifacts",
    )
