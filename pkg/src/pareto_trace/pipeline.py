"""Staged end-to-end pipeline with resumable, byte-deterministic artifacts.

Every stage writes its outputs as CSV/JSON under the run directory and can
rehydrate them for a resumed run; (config, seed) fully determine every
output byte (floats are serialized with shortest round-trip formatting, no
timestamps anywhere).
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .config import RunConfig
from .exceptions import ConfigError, ParetoTraceError
from .fronts import FrontCurve, conditional_front, geodesic_front, inactive_endpoints, linear_front, nondominated
from .geometry import InactiveSampler, Zonotope2D, stretch_sample, zonotope_vertices
from .model import CoexistenceModel, Network
from .sampling import (
    SampleSet,
    evaluate_batch,
    read_gradients_npz,
    read_samples_csv,
    sample_uniform,
    write_gradients_npz,
    write_samples_csv,
)
from .subspace import estimate_c_matrix, mix_subspaces, shadow_data
from .surrogate import PSDQuadraticSurrogate, polynomial_r2_table, r_squared
from .trace import TraceCurve, condition_profile, maximize_throughput, quadratic_trace

STAGES = [
    "sample",
    "eigen",
    "subspace",
    "shadow",
    "stretch",
    "fit",
    "condition",
    "trace",
    "front",
]


class Interval1D:
    """Feasible projected range for a one-column basis."""

    def __init__(self, halfwidth: float):
        self.halfwidth = float(halfwidth)

    def contains(self, points, tol: float = 1e-9):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.abs(pts[:, 0]) <= self.halfwidth + tol
        return inside if np.asarray(points).ndim > 1 else bool(inside[0])


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _surrogate_to_dict(sur: PSDQuadraticSurrogate) -> dict:
    return {
        "Q": [[float(v) for v in row] for row in sur.Q_],
        "a": [float(v) for v in sur.a_],
        "c": float(sur.c_),
        "dim": int(sur.dim_),
        "sign_convention": "models_negated_response",
        "n_iter": int(getattr(sur, "n_iter_", 0)),
        "objective": float(getattr(sur, "objective_", float("nan"))),
        "converged": bool(getattr(sur, "converged_", True)),
    }


def _surrogate_from_dict(d: dict) -> PSDQuadraticSurrogate:
    sur = PSDQuadraticSurrogate()
    sur.Q_ = np.asarray(d["Q"], dtype=float)
    sur.a_ = np.asarray(d["a"], dtype=float)
    sur.c_ = float(d["c"])
    sur.dim_ = int(d["dim"])
    return sur


class Pipeline:
    """Runs the staged reproduction study into one output directory."""

    def __init__(self, config: RunConfig, output_dir: str | Path | None = None, n_jobs: int = 1):
        self.config = config
        self.out = Path(output_dir if output_dir is not None else config.output_dir)
        self.n_jobs = n_jobs
        self.model = CoexistenceModel(
            scenario=config.scenario, domain=config.domain, solver_options=config.solver
        )
        self.ctx: dict = {}

    # -- stage: sample ----------------------------------------------------
    def run_sample(self):
        cfg = self.config
        samples = sample_uniform(cfg.domain, cfg.sampling.n, seed=cfg.sampling.seed)
        filled = evaluate_batch(
            samples,
            self.model,
            with_gradients=True,
            delta=cfg.sampling.delta,
            n_jobs=self.n_jobs,
        )
        self.ctx["samples"] = filled
        write_samples_csv(filled, self.out / "samples.csv")
        write_gradients_npz(filled, self.out / "gradients.npz")

    def load_sample(self):
        samples = read_samples_csv(self.out / "samples.csv", self.config.domain.dim)
        grads = read_gradients_npz(self.out / "gradients.npz")
        samples.gradients_wifi = grads["gradients_wifi"]
        samples.gradients_laa = grads["gradients_laa"]
        samples.delta = grads["delta"]
        samples.seed = grads["seed"]
        self.ctx["samples"] = samples

    # -- stage: eigen ------------------------------------------------------
    def run_eigen(self):
        samples = self.ctx["samples"]
        r = self.config.subspace.r
        as_w = estimate_c_matrix(samples.gradients_wifi, n_components=r)
        as_l = estimate_c_matrix(samples.gradients_laa, n_components=r)
        self.ctx["as_wifi"] = as_w
        self.ctx["as_laa"] = as_l
        for name, est in (("wifi", as_w), ("laa", as_l)):
            rows = [[i + 1, float(v)] for i, v in enumerate(est.eigenvalues_)]
            _write_csv(self.out / f"eigenvalues_{name}.csv", ["index", "eigenvalue"], rows)

    load_eigen = run_eigen  # deterministic recomputation from loaded gradients

    # -- stage: subspace ---------------------------------------------------
    def run_subspace(self):
        samples = self.ctx["samples"]
        mix = mix_subspaces(
            self.ctx["as_wifi"].basis_,
            self.ctx["as_laa"].basis_,
            samples.thetas_unit,
            samples.responses_wifi,
            samples.responses_laa,
            grid=self.config.subspace.mix_grid,
        )
        self.ctx["mix"] = mix
        _write_json(
            self.out / "subspace.json",
            {
                "r": int(mix.basis.shape[1]),
                "basis": [[float(v) for v in row] for row in mix.basis],
                "s_star": float(mix.s_star),
                "r2_wifi": float(mix.r2_wifi),
                "r2_laa": float(mix.r2_laa),
                "eigenvalues_wifi": [float(v) for v in self.ctx["as_wifi"].eigenvalues_],
                "eigenvalues_laa": [float(v) for v in self.ctx["as_laa"].eigenvalues_],
            },
        )

    def load_subspace(self):
        data = json.loads((self.out / "subspace.json").read_text(encoding="utf-8"))
        from .subspace import MixedSubspace

        self.ctx["mix"] = MixedSubspace(
            basis=np.asarray(data["basis"], dtype=float),
            s_star=float(data["s_star"]),
            r2_wifi=float(data["r2_wifi"]),
            r2_laa=float(data["r2_laa"]),
        )

    # -- stage: shadow -----------------------------------------------------
    def _region(self):
        basis = self.ctx["mix"].basis
        if basis.shape[1] == 2:
            return zonotope_vertices(basis)
        return Interval1D(float(np.sum(np.abs(basis[:, 0]))))

    def run_shadow(self):
        samples = self.ctx["samples"]
        basis = self.ctx["mix"].basis
        r = basis.shape[1]
        gamma_cols = [f"gamma_{i + 1}" for i in range(r)]
        for name, resp in (("wifi", samples.responses_wifi), ("laa", samples.responses_laa)):
            gamma, values = shadow_data(basis, samples.thetas_unit, resp)
            rows = [[*map(float, gamma[i]), float(values[i])] for i in range(gamma.shape[0])]
            _write_csv(self.out / f"shadow_{name}.csv", gamma_cols + ["throughput"], rows)
        region = self._region()
        if isinstance(region, Zonotope2D):
            rows = [[float(v[0]), float(v[1])] for v in region.vertices]
            _write_csv(self.out / "zonotope.csv", ["gamma_1", "gamma_2"], rows)
        else:
            rows = [[-region.halfwidth], [region.halfwidth]]
            _write_csv(self.out / "zonotope.csv", ["gamma_1"], rows)

    def load_shadow(self):
        pass  # shadow artifacts are terminal

    # -- stage: stretch ----------------------------------------------------
    def run_stretch(self):
        samples = self.ctx["samples"]
        basis = self.ctx["mix"].basis
        dim = self.config.domain.dim
        header = (
            [f"gamma_{i + 1}" for i in range(basis.shape[1])]
            + [f"unit_{i + 1}" for i in range(dim)]
            + [f"raw_{i + 1}" for i in range(dim)]
            + ["f_wifi", "f_laa"]
        )
        if basis.shape[1] != 2:
            self.ctx["stretch"] = None
            _write_csv(self.out / "stretch_samples.csv", header, [])
            return
        zono = self._region()
        new = stretch_sample(
            basis,
            samples.thetas_unit,
            zono,
            self.config.domain,
            n_boundary=self.config.subspace.n_boundary,
            seed=self.config.sampling.seed,
        )
        if new.thetas_unit.shape[0] == 0:
            self.ctx["stretch"] = None
            _write_csv(self.out / "stretch_samples.csv", header, [])
            return
        extra = evaluate_batch(
            SampleSet(thetas_unit=new.thetas_unit, thetas_raw=new.thetas_raw, seed=self.config.sampling.seed),
            self.model,
            with_gradients=False,
            n_jobs=self.n_jobs,
        )
        self.ctx["stretch"] = extra
        rows = []
        for i in range(extra.n_samples):
            gamma = extra.thetas_unit[i] @ basis
            rows.append(
                [
                    *map(float, gamma),
                    *map(float, extra.thetas_unit[i]),
                    *map(float, extra.thetas_raw[i]),
                    float(extra.responses_wifi[i]),
                    float(extra.responses_laa[i]),
                ]
            )
        _write_csv(self.out / "stretch_samples.csv", header, rows)

    def load_stretch(self):
        dim = self.config.domain.dim
        r = self.ctx["mix"].basis.shape[1]
        path = self.out / "stretch_samples.csv"
        data = np.genfromtxt(path, delimiter=",", skip_header=1)
        if data.size == 0:
            self.ctx["stretch"] = None
            return
        data = np.atleast_2d(data)
        unit = data[:, r : r + dim]
        raw = data[:, r + dim : r + 2 * dim]
        self.ctx["stretch"] = SampleSet(
            thetas_unit=unit,
            thetas_raw=raw,
            responses_wifi=data[:, r + 2 * dim],
            responses_laa=data[:, r + 2 * dim + 1],
        )

    # -- stage: fit ----------------------------------------------------------
    def run_fit(self):
        samples = self.ctx["samples"]
        stretch = self.ctx.get("stretch")
        basis = self.ctx["mix"].basis
        unit = samples.thetas_unit
        f_w = samples.responses_wifi
        f_l = samples.responses_laa
        if stretch is not None:
            unit = np.vstack([unit, stretch.thetas_unit])
            f_w = np.concatenate([f_w, stretch.responses_wifi])
            f_l = np.concatenate([f_l, stretch.responses_laa])
        gamma = unit @ basis
        sur2_w = PSDQuadraticSurrogate().fit(gamma, f_w)
        sur2_l = PSDQuadraticSurrogate().fit(gamma, f_l)
        surd_w = PSDQuadraticSurrogate().fit(samples.thetas_unit, samples.responses_wifi)
        surd_l = PSDQuadraticSurrogate().fit(samples.thetas_unit, samples.responses_laa)
        self.ctx.update(sur2_wifi=sur2_w, sur2_laa=sur2_l, surd_wifi=surd_w, surd_laa=surd_l)
        payload = {
            "reduced_wifi": _surrogate_to_dict(sur2_w),
            "reduced_laa": _surrogate_to_dict(sur2_l),
            "full_wifi": _surrogate_to_dict(surd_w),
            "full_laa": _surrogate_to_dict(surd_l),
            "diagnostics": {
                "r2_reduced_wifi": r_squared(sur2_w, gamma, f_w),
                "r2_reduced_laa": r_squared(sur2_l, gamma, f_l),
                "r2_full_wifi": r_squared(surd_w, samples.thetas_unit, samples.responses_wifi),
                "r2_full_laa": r_squared(surd_l, samples.thetas_unit, samples.responses_laa),
                "polynomial_r2_wifi": polynomial_r2_table(gamma, f_w),
                "polynomial_r2_laa": polynomial_r2_table(gamma, f_l),
                "full_hessian_eigenvalues_wifi": [float(v) for v in np.linalg.eigvalsh(2.0 * surd_w.Q_)[::-1]],
                "full_hessian_eigenvalues_laa": [float(v) for v in np.linalg.eigvalsh(2.0 * surd_l.Q_)[::-1]],
            },
        }
        _write_json(self.out / "surrogates.json", payload)

    def load_fit(self):
        data = json.loads((self.out / "surrogates.json").read_text(encoding="utf-8"))
        self.ctx.update(
            sur2_wifi=_surrogate_from_dict(data["reduced_wifi"]),
            sur2_laa=_surrogate_from_dict(data["reduced_laa"]),
            surd_wifi=_surrogate_from_dict(data["full_wifi"]),
            surd_laa=_surrogate_from_dict(data["full_laa"]),
        )

    # -- stage: condition ----------------------------------------------------
    def run_condition(self):
        grid = np.linspace(0.0, 1.0, self.config.trace.t_dense)
        cond_r = condition_profile(self.ctx["sur2_wifi"], self.ctx["sur2_laa"], grid)
        cond_d = condition_profile(self.ctx["surd_wifi"], self.ctx["surd_laa"], grid)
        rows = [[float(t), float(cr), float(cd)] for t, cr, cd in zip(grid, cond_r, cond_d)]
        _write_csv(self.out / "condition_profile.csv", ["t", "condition_reduced", "condition_full"], rows)

    def load_condition(self):
        pass

    # -- stage: trace ----------------------------------------------------------
    def run_trace(self):
        grid = np.linspace(0.0, 1.0, self.config.trace.t_dense)
        region = self._region()
        tr = quadratic_trace(self.ctx["sur2_wifi"], self.ctx["sur2_laa"], grid, region=region)
        self.ctx["trace_reduced"] = tr
        r = tr.points.shape[1]
        header = ["t"] + [f"gamma_{i + 1}" for i in range(r)] + ["feasible", "regularized"]
        rows = [
            [float(t), *map(float, tr.points[i]), int(tr.feasible[i]), int(tr.regularized[i])]
            for i, t in enumerate(tr.t_grid)
        ]
        _write_csv(self.out / "trace.csv", header, rows)

        tr_full = quadratic_trace(self.ctx["surd_wifi"], self.ctx["surd_laa"], grid)
        dim = tr_full.points.shape[1]
        header_f = ["t"] + [f"unit_{i + 1}" for i in range(dim)] + ["feasible", "regularized"]
        rows_f = [
            [float(t), *map(float, tr_full.points[i]), int(tr_full.feasible[i]), int(tr_full.regularized[i])]
            for i, t in enumerate(tr_full.t_grid)
        ]
        _write_csv(self.out / "trace_full.csv", header_f, rows_f)

    def load_trace(self):
        r = self.ctx["mix"].basis.shape[1]
        data = np.atleast_2d(np.genfromtxt(self.out / "trace.csv", delimiter=",", skip_header=1))
        self.ctx["trace_reduced"] = TraceCurve(
            t_grid=data[:, 0],
            points=data[:, 1 : 1 + r],
            feasible=data[:, 1 + r].astype(bool),
            regularized=data[:, 2 + r].astype(bool),
        )

    # -- stage: front ------------------------------------------------------------
    def run_front(self):
        cfg = self.config
        samples = self.ctx["samples"]
        basis = self.ctx["mix"].basis
        tr = self.ctx["trace_reduced"]
        seed = cfg.sampling.seed

        theta0, best_w = maximize_throughput(
            self.model,
            Network.WIFI,
            multistart=cfg.trace.multistart,
            seed=seed,
            samples_unit=samples.thetas_unit,
            sample_objectives=samples.responses_wifi,
            maxfev=cfg.trace.maxfev,
        )
        theta1, best_l = maximize_throughput(
            self.model,
            Network.LAA,
            multistart=cfg.trace.multistart,
            seed=seed + 1,
            samples_unit=samples.thetas_unit,
            sample_objectives=samples.responses_laa,
            maxfev=cfg.trace.maxfev,
        )

        feasible_idx = np.flatnonzero(tr.feasible)
        if feasible_idx.size == 0:
            raise ParetoTraceError("reduced trace never enters the projected domain")
        gamma0 = tr.points[feasible_idx[0]]
        gamma1 = tr.points[feasible_idx[-1]]
        zeta0, zeta1 = inactive_endpoints(
            self.model,
            basis,
            gamma0,
            gamma1,
            multistart=min(10, cfg.trace.multistart),
            seed=seed,
            maxfev=min(400, cfg.trace.maxfev),
        )

        front_geo = geodesic_front(self.model, basis, tr, zeta0, zeta1, n_t=cfg.trace.n_t)
        front_lin = linear_front(self.model, theta0, theta1, n_t=cfg.trace.n_t)
        front_cond = conditional_front(
            self.model, basis, tr, n_t=cfg.trace.n_t, n_inactive=cfg.trace.n_inactive, seed=seed
        )
        self.ctx.update(front_geodesic=front_geo, front_linear=front_lin, front_conditional=front_cond)
        self._write_front(front_geo, "fronts_geodesic.csv")
        self._write_front(front_lin, "fronts_linear.csv")
        self._write_front(front_cond, "fronts_conditional.csv")

        pairs = np.column_stack([samples.responses_wifi, samples.responses_laa])
        keep = nondominated(pairs)
        rows = [[int(i), float(pairs[i, 0]), float(pairs[i, 1])] for i in keep]
        _write_csv(self.out / "nondominated.csv", ["sample_index", "f_wifi", "f_laa"], rows)
        _write_json(
            self.out / "front_endpoints.json",
            {
                "theta_left_unit": [float(v) for v in theta0],
                "theta_right_unit": [float(v) for v in theta1],
                "best_wifi": float(best_w),
                "best_laa": float(best_l),
                "zeta_left": [float(v) for v in zeta0],
                "zeta_right": [float(v) for v in zeta1],
            },
        )

    def _write_front(self, front: FrontCurve, filename: str):
        header = ["t", "f_wifi", "f_laa"]
        has_spread = front.f_wifi_min is not None
        if has_spread:
            header += ["f_wifi_min", "f_wifi_max", "f_laa_min", "f_laa_max"]
        rows = []
        for i, t in enumerate(front.t_grid):
            row = [float(t), float(front.f_wifi[i]), float(front.f_laa[i])]
            if has_spread:
                row += [
                    float(front.f_wifi_min[i]),
                    float(front.f_wifi_max[i]),
                    float(front.f_laa_min[i]),
                    float(front.f_laa_max[i]),
                ]
            rows.append(row)
        _write_csv(self.out / filename, header, rows)

    def load_front(self):
        pass

    # -- driver ------------------------------------------------------------
    def run(self, from_stage: str | None = None, until_stage: str | None = None) -> Path:
        for stage in (from_stage, until_stage):
            if stage is not None and stage not in STAGES:
                raise ConfigError(f"unknown stage {stage!r}; stages are {STAGES}")
        self.out.mkdir(parents=True, exist_ok=True)
        start = STAGES.index(from_stage) if from_stage else 0
        stop = STAGES.index(until_stage) + 1 if until_stage else len(STAGES)
        if stop <= start:
            raise ConfigError("until-stage precedes from-stage")
        for name in STAGES[:start]:
            getattr(self, f"load_{name}")()
        for name in STAGES[start:stop]:
            try:
                getattr(self, f"run_{name}")()
            except ParetoTraceError as exc:
                raise ParetoTraceError(f"stage '{name}' failed: {exc}") from exc
        self._write_manifest()
        return self.out

    def _write_manifest(self):
        files = sorted(
            p.name
            for p in self.out.iterdir()
            if p.is_file() and p.name != "manifest.json"
        )
        checksums = {}
        for name in files:
            digest = hashlib.sha256((self.out / name).read_bytes()).hexdigest()
            checksums[name] = digest
        _write_json(
            self.out / "manifest.json",
            {
                "config": self.config.to_dict(),
                "config_hash": self.config.config_hash(),
                "seed": self.config.sampling.seed,
                "stages": STAGES,
                "files": checksums,
            },
        )
