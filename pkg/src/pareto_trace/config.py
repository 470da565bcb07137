"""Run configuration: JSON ingestion, validation, and canonical hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .domain import ParameterDomain, default_domain
from .exceptions import ConfigError, DomainError
from .mac import SolverOptions
from .model import Scenario, TimingVector


@dataclass
class SamplingConfig:
    n: int = 2000
    seed: int = 0
    delta: float = 1e-6

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("sampling.n must be at least 1")
        if self.delta <= 0:
            raise ConfigError("sampling.delta must be positive")


@dataclass
class SubspaceConfig:
    r: int = 2
    mix_grid: int = 101
    n_boundary: int = 25

    def __post_init__(self):
        if self.r not in (1, 2):
            raise ConfigError("subspace.r must be 1 or 2")
        if self.mix_grid < 2:
            raise ConfigError("subspace.mix_grid must be at least 2")
        if self.n_boundary < 3:
            raise ConfigError("subspace.n_boundary must be at least 3")


@dataclass
class TraceConfig:
    n_t: int = 15
    n_inactive: int = 25
    rk4_step: float = 1e-3
    t_dense: int = 101
    multistart: int = 20
    maxfev: int = 2000

    def __post_init__(self):
        if self.n_t < 2:
            raise ConfigError("trace.n_t must be at least 2")
        if self.n_inactive < 1:
            raise ConfigError("trace.n_inactive must be at least 1")
        if self.rk4_step <= 0:
            raise ConfigError("trace.rk4_step must be positive")
        if self.t_dense < 2:
            raise ConfigError("trace.t_dense must be at least 2")
        if self.multistart < 1:
            raise ConfigError("trace.multistart must be at least 1")
        if self.maxfev < 10:
            raise ConfigError("trace.maxfev must be at least 10")


@dataclass
class RunConfig:
    scenario: Scenario = field(default_factory=Scenario)
    domain: ParameterDomain = field(default_factory=default_domain)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    subspace: SubspaceConfig = field(default_factory=SubspaceConfig)
    trace: TraceConfig = field(default_factory=TraceConfig)
    solver: SolverOptions = field(default_factory=SolverOptions)
    output_dir: str = "runs/default"
    threads: int = 1

    def __post_init__(self):
        if self.sampling.n < self.domain.dim + 1:
            raise ConfigError(
                f"sampling.n = {self.sampling.n} is below D + 1 = {self.domain.dim + 1} "
                "needed for gradient batches"
            )
        if self.threads < 1 and self.threads != -1:
            raise ConfigError("threads must be positive (or -1 for all cores)")

    def to_dict(self) -> dict:
        """Scientific configuration only: where artifacts go and how many
        workers computed them does not change a single output byte, so
        ``output_dir`` and ``threads`` stay out of the manifest and hash."""
        return {
            "scenario": asdict(self.scenario),
            "domain": {
                "lower": list(map(float, self.domain.lower)),
                "upper": list(map(float, self.domain.upper)),
                "scale": list(self.domain.scale),
                "names": list(self.domain.names),
            },
            "sampling": asdict(self.sampling),
            "subspace": asdict(self.subspace),
            "trace": asdict(self.trace),
            "solver": asdict(self.solver),
        }

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _build(section: dict, cls, name: str):
    try:
        return cls(**section)
    except TypeError as exc:
        raise ConfigError(f"bad '{name}' section: {exc}") from None
    except DomainError as exc:
        raise ConfigError(f"bad '{name}' section: {exc}") from None


def config_from_dict(data: dict) -> RunConfig:
    data = dict(data)
    unknown = set(data) - {
        "scenario", "domain", "sampling", "subspace", "trace", "solver", "output_dir", "threads",
    }
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    scenario_data = dict(data.get("scenario", {}))
    if "timing" in scenario_data:
        timing = scenario_data["timing"]
        if isinstance(timing, (list, tuple)):
            try:
                scenario_data["timing"] = TimingVector.from_array(np.asarray(timing, dtype=float))
            except DomainError as exc:
                raise ConfigError(f"bad 'scenario.timing' section: {exc}") from None
        elif isinstance(timing, dict):
            scenario_data["timing"] = _build(timing, TimingVector, "scenario.timing")
        else:
            raise ConfigError("scenario.timing must be a 6-list or an object")
    scenario = _build(scenario_data, Scenario, "scenario")

    if "domain" in data:
        dom = data["domain"]
        domain = ParameterDomain(
            lower=np.asarray(dom["lower"], dtype=float),
            upper=np.asarray(dom["upper"], dtype=float),
            scale=dom.get("scale"),
            names=dom.get("names"),
        )
    else:
        domain = default_domain()

    return RunConfig(
        scenario=scenario,
        domain=domain,
        sampling=_build(dict(data.get("sampling", {})), SamplingConfig, "sampling"),
        subspace=_build(dict(data.get("subspace", {})), SubspaceConfig, "subspace"),
        trace=_build(dict(data.get("trace", {})), TraceConfig, "trace"),
        solver=_build(dict(data.get("solver", {})), SolverOptions, "solver"),
        output_dir=str(data.get("output_dir", "runs/default")),
        threads=int(data.get("threads", 1)),
    )


def load_config(path: str | Path | None) -> RunConfig:
    """Read a JSON run configuration; ``None`` yields the shipped defaults."""
    if path is None:
        return RunConfig()
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    return config_from_dict(data)
