"""Invariant suite behind the ``validate`` subcommand.

Small, fast spot checks of the package's contracts on a down-scaled run:
normalization identities, solver consistency, transform round trips, fit
recovery, geodesic orthonormality, trace stationarity, geometry
containment, and sorting-oracle agreement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .domain import default_domain
from .fronts import nondominated, nondominated_bruteforce
from .geometry import zonotope_vertices
from .mac import bianchi_probability, slot_probabilities
from .model import CoexistenceModel, mac_parameters_from_theta
from .sampling import evaluate_batch, sample_uniform
from .subspace import grassmann_geodesic
from .surrogate import PSDQuadraticSurrogate
from .trace import quadratic_trace


@dataclass
class ValidationReport:
    checks: list[tuple[str, bool, str]] = field(default_factory=list)
    fallback_count: int = 0

    def add(self, name: str, ok: bool, detail: str = ""):
        self.checks.append((name, bool(ok), detail))

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)


def run_validation(config: RunConfig | None = None, n_samples: int = 200) -> ValidationReport:
    config = config or RunConfig()
    report = ValidationReport()
    rng = np.random.default_rng(config.sampling.seed)
    domain = config.domain
    model = CoexistenceModel(scenario=config.scenario, domain=domain, solver_options=config.solver)

    # Slot normalization + probability ranges over random designs.
    from .mac import solve_probability_system

    worst_norm = 0.0
    range_ok = True
    fallbacks = 0
    n_norm = min(n_samples, 200)
    units = rng.uniform(-1.0, 1.0, size=(n_norm, domain.dim))
    for u in units:
        theta = domain.from_unit(u)
        state = solve_probability_system(mac_parameters_from_theta(theta, config.scenario), config.solver)
        fallbacks += int(state.fallback)
        p_t = slot_probabilities(state)
        worst_norm = max(worst_norm, abs(float(p_t.sum()) - 1.0))
        all_probs = np.concatenate([state.p_w, state.p_l, state.c_w, state.c_l, p_t])
        range_ok = range_ok and bool(np.all((all_probs >= 0.0) & (all_probs <= 1.0)))
    report.add("slot_normalization", worst_norm < 1e-10, f"worst |sum-1| = {worst_norm:.2e} over {n_norm}")
    report.add("probability_ranges", range_ok, "all probabilities in [0, 1]")

    # Transmission probability continuous across the c = 1/2 limit.
    worst_cont = 0.0
    for omega in (8, 16, 64, 256, 1024):
        for mu in range(0, 9):
            mid = bianchi_probability(0.5, omega, mu)
            for eps in (-1e-8, 1e-8):
                worst_cont = max(worst_cont, abs(mid - bianchi_probability(0.5 + eps, omega, mu)))
    report.add("bianchi_continuity", worst_cont < 1e-6, f"worst gap at c=1/2: {worst_cont:.2e}")

    # Exchanging networks permutes the solution.
    theta = domain.from_unit(rng.uniform(-1, 1, domain.dim))
    swapped = theta.copy()
    swapped[[0, 1]] = swapped[[1, 0]]
    swapped[[2, 3]] = swapped[[3, 2]]
    st = solve_probability_system(mac_parameters_from_theta(theta, config.scenario), config.solver)
    st_swap = solve_probability_system(mac_parameters_from_theta(swapped, config.scenario), config.solver)
    sym_err = max(
        float(np.max(np.abs(st.p_w - st_swap.p_l))),
        float(np.max(np.abs(st.c_w - st_swap.c_l))),
    )
    report.add("solver_symmetry", sym_err < 1e-9, f"permutation error {sym_err:.2e}")

    # Unit-cube transform round trip.
    thetas = domain.from_unit(rng.uniform(-1, 1, size=(n_samples, domain.dim)))
    rt = domain.from_unit(domain.to_unit(thetas))
    rt_err = float(np.max(np.abs(rt - thetas) / np.maximum(np.abs(thetas), 1e-300)))
    report.add("scaling_round_trip", rt_err < 1e-12, f"max relative error {rt_err:.2e}")

    # Throughput positivity and symmetric-design equality.
    sym_theta = domain.from_unit(np.zeros(domain.dim))
    sym_theta[[1, 3]] = sym_theta[[0, 2]]
    f_w, f_l = model.throughput(sym_theta)
    report.add(
        "throughput_symmetry",
        f_w > 0 and f_l > 0 and abs(f_w - f_l) < 1e-9,
        f"f_wifi={f_w:.6f} f_laa={f_l:.6f}",
    )

    # PSD fit recovery on a realizable convex quadratic.
    coords = rng.uniform(-1, 1, size=(80, 3))
    q_true = np.diag([1.5, 0.7, 0.2])
    resp = -(np.einsum("ni,ij,nj->n", coords, q_true, coords) + coords @ np.array([0.3, -0.2, 0.1]) + 0.5)
    fit = PSDQuadraticSurrogate().fit(coords, resp)
    fit_err = float(np.max(np.abs(fit.Q_ - q_true)))
    report.add("psd_fit_recovery", fit_err < 1e-6, f"max Q error {fit_err:.2e}")
    min_eig = float(np.linalg.eigvalsh(fit.Q_)[0])
    report.add("psd_fit_cone", min_eig >= -1e-8, f"min eigenvalue {min_eig:.2e}")

    # Geodesic orthonormality along the path.
    a_basis = np.linalg.qr(rng.normal(size=(domain.dim, 2)))[0]
    b_basis = np.linalg.qr(rng.normal(size=(domain.dim, 2)))[0]
    worst_orth = max(
        float(np.max(np.abs(grassmann_geodesic(a_basis, b_basis, s).T @ grassmann_geodesic(a_basis, b_basis, s) - np.eye(2))))
        for s in np.linspace(0.0, 1.0, 21)
    )
    report.add("geodesic_orthonormality", worst_orth < 1e-9, f"worst deviation {worst_orth:.2e}")

    # Quadratic trace stationarity on a synthetic surrogate pair.
    def rand_sur(stream):
        mat = stream.normal(size=(4, 4))
        sur = PSDQuadraticSurrogate()
        sur.Q_ = mat @ mat.T + 0.1 * np.eye(4)
        sur.a_ = stream.normal(size=4)
        sur.c_ = 0.0
        sur.dim_ = 4
        return sur

    sur_w, sur_l = rand_sur(rng), rand_sur(rng)
    tr = quadratic_trace(sur_w, sur_l, np.linspace(0, 1, 25))
    worst_stat = 0.0
    for i, t in enumerate(tr.t_grid):
        g = (1 - t) * sur_w.gradient(tr.points[i]) + t * sur_l.gradient(tr.points[i])
        worst_stat = max(worst_stat, float(np.max(np.abs(g))))
    report.add("trace_stationarity", worst_stat < 1e-8, f"worst gradient norm {worst_stat:.2e}")

    # Zonotope contains sampled corner projections.
    basis = np.linalg.qr(rng.normal(size=(domain.dim, 2)))[0]
    zono = zonotope_vertices(basis)
    corners = rng.choice([-1.0, 1.0], size=(512, domain.dim))
    inside = zono.contains(corners @ basis, tol=1e-9)
    report.add("zonotope_containment", bool(np.all(inside)), f"{int(inside.sum())}/512 corners inside")

    # Sorting agrees with the quadratic-time oracle.
    pts = np.round(rng.uniform(0, 1, size=(500, 2)), 2)
    agree = np.array_equal(nondominated(pts), nondominated_bruteforce(pts))
    report.add("nondominated_oracle", agree, "matches brute force on 500 points with ties")

    # Small evaluation batch: failures and fallback accounting.
    small = sample_uniform(domain, min(n_samples, 50), seed=config.sampling.seed)
    filled = evaluate_batch(small, model, with_gradients=False, n_jobs=1)
    report.add(
        "batch_evaluation",
        filled.n_failed == 0,
        f"{filled.n_samples} evaluated, {filled.n_failed} failed",
    )
    report.fallback_count = fallbacks + filled.n_fallback
    return report
