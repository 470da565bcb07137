"""Monte-Carlo sampling of the design cube and forward-difference gradients.

Gradients are estimated in unit-cube coordinates: each of the D partials
costs one extra model evaluation, so a gradient batch performs exactly
N * (D + 1) model evaluations.  Evaluation is a parallel map over samples
with index-ordered aggregation, so results do not depend on worker count.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from .domain import ParameterDomain
from .exceptions import DimensionError, DomainError, SolverError
from .model import CoexistenceModel

DEFAULT_FD_STEP = 1e-6


@dataclass
class SampleSet:
    """Design samples with responses and optional unit-scale gradients."""

    thetas_unit: np.ndarray
    thetas_raw: np.ndarray
    responses_wifi: np.ndarray | None = None
    responses_laa: np.ndarray | None = None
    gradients_wifi: np.ndarray | None = None
    gradients_laa: np.ndarray | None = None
    seed: int = 0
    delta: float = DEFAULT_FD_STEP
    n_failed: int = 0
    n_fallback: int = 0

    def __post_init__(self):
        if self.thetas_unit.shape != self.thetas_raw.shape:
            raise DimensionError("unit and raw sample blocks must have equal shapes")
        if np.any(np.abs(self.thetas_unit) > 1.0 + 1e-9):
            raise DomainError("unit samples must lie in [-1, 1]")
        for arr in (self.responses_wifi, self.responses_laa):
            if arr is not None and arr.shape[0] != self.n_samples:
                raise DimensionError("response length does not match sample count")
        for arr in (self.gradients_wifi, self.gradients_laa):
            if arr is not None and arr.shape != self.thetas_unit.shape:
                raise DimensionError("gradient block shape does not match samples")

    @property
    def n_samples(self) -> int:
        return self.thetas_unit.shape[0]

    @property
    def dim(self) -> int:
        return self.thetas_unit.shape[1]

    def has_responses(self) -> bool:
        return self.responses_wifi is not None and self.responses_laa is not None

    def has_gradients(self) -> bool:
        return self.gradients_wifi is not None and self.gradients_laa is not None


def sample_uniform(domain: ParameterDomain, n: int, seed: int = 0) -> SampleSet:
    """Draw ``n`` i.i.d. uniform unit-cube samples and their raw coordinates."""
    if n < 1:
        raise DomainError("need at least one sample")
    rng = np.random.default_rng(seed)
    unit = rng.uniform(-1.0, 1.0, size=(n, domain.dim))
    raw = domain.from_unit(unit)
    return SampleSet(thetas_unit=unit, thetas_raw=raw, seed=seed)


def fd_gradient(f, theta_unit: np.ndarray, delta: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Forward-difference gradient of a scalar objective over unit coordinates."""
    if delta <= 0.0:
        raise DomainError("finite-difference step must be positive")
    theta_unit = np.asarray(theta_unit, dtype=float)
    base = f(theta_unit)
    grad = np.empty_like(theta_unit)
    for i in range(theta_unit.size):
        bumped = theta_unit.copy()
        bumped[i] += delta
        grad[i] = (f(bumped) - base) / delta
    return grad


def _evaluate_one(model: CoexistenceModel, unit_row: np.ndarray, delta: float, with_gradients: bool):
    """Responses (and forward-difference gradients) for one sample.

    Perturbed points may poke slightly past a cube face; the raw-parameter
    map extrapolates smoothly there instead of clipping, so the difference
    quotient keeps its nominal step.
    """
    try:
        out = model.evaluate_unit(unit_row)
        f_w0, f_l0 = out.f_wifi, out.f_laa
        fallback = out.state.fallback
        if not with_gradients:
            return f_w0, f_l0, None, None, fallback
        d = unit_row.size
        g_w = np.empty(d)
        g_l = np.empty(d)
        for i in range(d):
            bumped = unit_row.copy()
            bumped[i] += delta
            out_i = model.evaluate_unit(bumped)
            fallback = fallback or out_i.state.fallback
            g_w[i] = (out_i.f_wifi - f_w0) / delta
            g_l[i] = (out_i.f_laa - f_l0) / delta
        return f_w0, f_l0, g_w, g_l, fallback
    except SolverError:
        return None


def evaluate_batch(
    samples: SampleSet,
    model: CoexistenceModel,
    with_gradients: bool = False,
    delta: float = DEFAULT_FD_STEP,
    n_jobs: int = 1,
    max_failure_fraction: float = 0.01,
) -> SampleSet:
    """Fill a sample set with throughput responses (and optional gradients).

    Samples whose probability solve fails anywhere in their evaluation
    stencil are dropped; the count is recorded and more than
    ``max_failure_fraction`` failures aborts the batch.
    """
    unit = samples.thetas_unit
    results = Parallel(n_jobs=n_jobs)(
        delayed(_evaluate_one)(model, unit[i], delta, with_gradients) for i in range(samples.n_samples)
    )
    ok = [i for i, r in enumerate(results) if r is not None]
    n_failed = samples.n_samples - len(ok)
    if n_failed > max_failure_fraction * samples.n_samples:
        raise SolverError(
            f"{n_failed} of {samples.n_samples} samples failed the probability solve"
        )
    f_w = np.array([results[i][0] for i in ok])
    f_l = np.array([results[i][1] for i in ok])
    g_w = g_l = None
    if with_gradients:
        g_w = np.vstack([results[i][2] for i in ok]) if ok else np.empty((0, samples.dim))
        g_l = np.vstack([results[i][3] for i in ok]) if ok else np.empty((0, samples.dim))
    return SampleSet(
        thetas_unit=unit[ok],
        thetas_raw=samples.thetas_raw[ok],
        responses_wifi=f_w,
        responses_laa=f_l,
        gradients_wifi=g_w,
        gradients_laa=g_l,
        seed=samples.seed,
        delta=delta,
        n_failed=n_failed,
        n_fallback=sum(1 for i in ok if results[i][4]),
    )


def _float_repr(x: float) -> str:
    return repr(float(x))


def write_samples_csv(samples: SampleSet, path: str | Path) -> None:
    """One row per sample: unit coords, raw coords, the two responses."""
    names = [f"unit_{i + 1}" for i in range(samples.dim)]
    names += [f"raw_{i + 1}" for i in range(samples.dim)]
    names += ["f_wifi", "f_laa"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for i in range(samples.n_samples):
            row = [_float_repr(v) for v in samples.thetas_unit[i]]
            row += [_float_repr(v) for v in samples.thetas_raw[i]]
            row += [
                _float_repr(samples.responses_wifi[i]) if samples.has_responses() else "",
                _float_repr(samples.responses_laa[i]) if samples.has_responses() else "",
            ]
            writer.writerow(row)


def read_samples_csv(path: str | Path, dim: int) -> SampleSet:
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    data = np.atleast_2d(data)
    unit = data[:, :dim]
    raw = data[:, dim : 2 * dim]
    f_w = data[:, 2 * dim]
    f_l = data[:, 2 * dim + 1]
    has_resp = not np.all(np.isnan(f_w))
    return SampleSet(
        thetas_unit=unit,
        thetas_raw=raw,
        responses_wifi=f_w if has_resp else None,
        responses_laa=f_l if has_resp else None,
    )


def write_gradients_npz(samples: SampleSet, path: str | Path) -> None:
    np.savez(
        path,
        gradients_wifi=samples.gradients_wifi,
        gradients_laa=samples.gradients_laa,
        delta=np.array(samples.delta),
        seed=np.array(samples.seed),
    )


def read_gradients_npz(path: str | Path) -> dict:
    with np.load(path) as data:
        return {
            "gradients_wifi": data["gradients_wifi"],
            "gradients_laa": data["gradients_laa"],
            "delta": float(data["delta"]),
            "seed": int(data["seed"]),
        }
