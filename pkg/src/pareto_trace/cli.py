"""Command-line interface: evaluation, pipeline runs, and validation.

Exit codes: 0 success, 1 runtime failure, 2 configuration or input
validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .domain import NOMINAL_THETA
from .exceptions import ConfigError, DomainError, ParetoTraceError
from .model import CoexistenceModel
from .pipeline import STAGES, Pipeline

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INVALID = 2


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", metavar="PATH", help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="override the sampling seed")
    parser.add_argument("--n", type=int, help="override the sample count")
    parser.add_argument("--output-dir", help="override the artifact directory")
    parser.add_argument(
        "--threads",
        type=int,
        help="worker count for batch evaluation (default: PARETO_TRACE_THREADS or config)",
    )


def _resolve_config(args) -> RunConfig:
    config = load_config(getattr(args, "config", None))
    if getattr(args, "seed", None) is not None:
        config.sampling.seed = args.seed
    if getattr(args, "n", None) is not None:
        config.sampling.n = args.n
        if config.sampling.n < config.domain.dim + 1:
            raise ConfigError(
                f"--n {args.n} is below D + 1 = {config.domain.dim + 1} needed for gradient runs"
            )
    if getattr(args, "output_dir", None) is not None:
        config.output_dir = args.output_dir
    return config


def _resolve_threads(args, config: RunConfig) -> int:
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get("PARETO_TRACE_THREADS")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"PARETO_TRACE_THREADS={env!r} is not an integer") from None
    return config.threads


def _parse_theta(args, config: RunConfig) -> np.ndarray:
    if args.nominal:
        return NOMINAL_THETA.copy()
    if args.theta is None:
        raise ConfigError("provide --theta v1,...,v17 or --nominal")
    parts = args.theta.replace(";", ",").split(",")
    try:
        theta = np.array([float(p) for p in parts if p.strip() != ""])
    except ValueError:
        raise ConfigError("could not parse --theta as comma-separated numbers") from None
    if theta.size != config.domain.dim:
        raise ConfigError(f"--theta needs {config.domain.dim} values, got {theta.size}")
    return theta


def cmd_eval(args) -> int:
    config = _resolve_config(args)
    theta = _parse_theta(args, config)
    model = CoexistenceModel(scenario=config.scenario, domain=config.domain, solver_options=config.solver)
    out = model.evaluate(theta)
    payload = {
        "f_wifi": out.f_wifi,
        "f_laa": out.f_laa,
        "snr_wifi": out.snr_wifi,
        "snr_laa": out.snr_laa,
        "snr_wifi_db": 10.0 * np.log10(out.snr_wifi),
        "snr_laa_db": 10.0 * np.log10(out.snr_laa),
        "slot_probabilities": [float(v) for v in out.slot_probs],
        "solve_residual": out.state.residual_norm,
        "used_fallback": bool(out.state.fallback),
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _run_stages(args, from_stage, until_stage) -> int:
    config = _resolve_config(args)
    pipe = Pipeline(config, output_dir=config.output_dir, n_jobs=_resolve_threads(args, config))
    out = pipe.run(from_stage=from_stage, until_stage=until_stage)
    print(f"artifacts written to {out}")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    return _run_stages(args, args.from_stage, None)


def cmd_sample(args) -> int:
    return _run_stages(args, None, "sample")


def cmd_subspace(args) -> int:
    config = _resolve_config(args)
    if args.r is not None:
        config.subspace.r = args.r
    pipe = Pipeline(config, output_dir=config.output_dir, n_jobs=_resolve_threads(args, config))
    out = pipe.run(from_stage="eigen", until_stage="shadow")
    print(f"artifacts written to {out}")
    return EXIT_OK


def cmd_fit(args) -> int:
    return _run_stages(args, "stretch", "fit")


def cmd_trace(args) -> int:
    return _run_stages(args, "condition", "trace")


def cmd_front(args) -> int:
    return _run_stages(args, "front", "front")


def cmd_nondominated(args) -> int:
    from .fronts import nondominated
    from .pipeline import _write_csv
    from .sampling import read_samples_csv
    from pathlib import Path

    config = _resolve_config(args)
    run_dir = Path(config.output_dir)
    samples = read_samples_csv(run_dir / "samples.csv", config.domain.dim)
    if not samples.has_responses():
        raise ConfigError("samples.csv has no responses; run the sample stage first")
    pairs = np.column_stack([samples.responses_wifi, samples.responses_laa])
    keep = nondominated(pairs)
    rows = [[int(i), float(pairs[i, 0]), float(pairs[i, 1])] for i in keep]
    _write_csv(run_dir / "nondominated.csv", ["sample_index", "f_wifi", "f_laa"], rows)
    print(f"{keep.size} non-dominated of {pairs.shape[0]} samples -> {run_dir / 'nondominated.csv'}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validate import run_validation

    config = _resolve_config(args)
    report = run_validation(config, n_samples=args.n or 200)
    width = max(len(name) for name, _, _ in report.checks)
    for name, ok, detail in report.checks:
        status = "PASS" if ok else "FAIL"
        print(f"{name:<{width}}  {status}  {detail}")
    print(f"solver fallback activations: {report.fallback_count}")
    failed = sum(1 for _, ok, _ in report.checks if not ok)
    print(f"{len(report.checks) - failed}/{len(report.checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pareto-trace",
        description=(
            "Trade-off curves between two coexisting unlicensed-band networks: "
            "analytic throughput model, gradient subspace reduction, quadratic "
            "surrogates, and Pareto tracing."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate throughputs at one design vector")
    _add_common(p_eval)
    p_eval.add_argument("--theta", help="comma-separated raw parameter values")
    p_eval.add_argument("--nominal", action="store_true", help="use the documented nominal design")
    p_eval.set_defaults(func=cmd_eval)

    p_pipe = sub.add_parser("pipeline", help="run the full staged study")
    _add_common(p_pipe)
    p_pipe.add_argument("--from-stage", choices=STAGES, help="resume from this stage")
    p_pipe.set_defaults(func=cmd_pipeline)

    p_sample = sub.add_parser("sample", help="draw and evaluate the sample batch")
    _add_common(p_sample)
    p_sample.set_defaults(func=cmd_sample)

    p_sub = sub.add_parser("subspace", help="estimate, mix, and export subspaces")
    _add_common(p_sub)
    p_sub.add_argument("--r", type=int, choices=(1, 2), help="subspace dimension")
    p_sub.set_defaults(func=cmd_subspace)

    p_fit = sub.add_parser("fit", help="fit quadratic surrogates (stretch + fit stages)")
    _add_common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_trace = sub.add_parser("trace", help="conditioning profile and quadratic traces")
    _add_common(p_trace)
    p_trace.set_defaults(func=cmd_trace)

    p_front = sub.add_parser("front", help="front curves and non-dominated samples")
    _add_common(p_front)
    p_front.set_defaults(func=cmd_front)

    p_nd = sub.add_parser("nondominated", help="non-dominated subset of sampled responses")
    _add_common(p_nd)
    p_nd.set_defaults(func=cmd_nondominated)

    p_val = sub.add_parser("validate", help="run the invariant suite and report pass/fail")
    _add_common(p_val)
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ParetoTraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
