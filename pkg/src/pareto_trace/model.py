"""Coexistence throughput model for a Wi-Fi / LAA pair sharing one channel.

Combines the saturation MAC fixed point with a deterministic link budget:
per-network throughput is payload duration times spectral efficiency times
the fraction of channel time spent on that network's successful
transmissions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .domain import ParameterDomain, default_domain
from .exceptions import DomainError
from .mac import MacParameters, ProbabilityState, SolverOptions, slot_probabilities, solve_probability_system


class Network(enum.Enum):
    WIFI = "wifi"
    LAA = "laa"


@dataclass
class TimingVector:
    """Average slot durations (microseconds) for the six slot types.

    Order matches the slot-probability vector: idle, Wi-Fi success, LAA
    success, Wi-Fi collision, LAA collision, cross-network collision.  The
    busy durations shipped here are placeholders on the millisecond scale;
    all reported throughputs are relative to the configured values.
    """

    t_idle: float = 9.0
    t_succ_wifi: float = 1000.0
    t_succ_laa: float = 1000.0
    t_coll_wifi: float = 1000.0
    t_coll_laa: float = 1000.0
    t_coll_cross: float = 1000.0

    def __post_init__(self):
        if np.any(self.as_array() <= 0.0):
            raise DomainError("all slot durations must be positive")

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.t_idle,
                self.t_succ_wifi,
                self.t_succ_laa,
                self.t_coll_wifi,
                self.t_coll_laa,
                self.t_coll_cross,
            ],
            dtype=float,
        )

    @classmethod
    def from_array(cls, t) -> "TimingVector":
        t = np.asarray(t, dtype=float)
        if t.shape != (6,):
            raise DomainError("timing vector must have 6 entries")
        return cls(*t.tolist())


@dataclass
class Scenario:
    """Fixed context for a model evaluation: node counts, geometry, timing.

    The representative link for the link budget uses the Tx-Rx ground
    distance and the two node heights from the design vector; client counts
    and area dimensions are carried for validation and provenance but do not
    enter the deterministic throughput formula.
    """

    n_laa: int = 6
    n_wifi: int = 6
    n_ue: int = 6
    n_sta: int = 6
    n_channels: int = 1
    area_width: float = 120.0
    area_height: float = 80.0
    timing: TimingVector = field(default_factory=TimingVector)
    payload_wifi: float = 1000.0
    payload_laa: float = 1000.0
    los_weight: float = 0.5
    shadow_margin_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_laa < 1 or self.n_wifi < 1:
            raise DomainError("each network needs at least one transmitter")
        if self.area_width <= 0 or self.area_height <= 0:
            raise DomainError("scenario dimensions must be positive")
        if not 0.0 <= self.los_weight <= 1.0:
            raise DomainError("los_weight must lie in [0, 1]")
        if self.payload_wifi <= 0 or self.payload_laa <= 0:
            raise DomainError("payload durations must be positive")

    def with_timing(self, timing: TimingVector) -> "Scenario":
        return replace(self, timing=timing)


THERMAL_NOISE_DBM_PER_HZ = -174.0


def link_snr(theta: np.ndarray, scenario: Scenario, network: Network = Network.WIFI) -> float:
    """Linear SNR of the representative downlink for one network.

    Link budget in dB: transmit power + antenna gain - blended LoS/NLoS path
    loss - shadow margin - noise floor.  The blend weight is the scenario's
    ``los_weight``; the shadow margin is a deterministic multiple of the
    shadow-fading standard deviation.  Both networks share the same PHY
    parameters, so the result does not depend on ``network``.
    """
    theta = np.asarray(theta, dtype=float)
    dist = math.hypot(theta[5], theta[6] - theta[7])
    if dist <= 0.0:
        raise DomainError("Tx-Rx distance must be positive")
    log_d = math.log10(dist)
    pl_los = theta[9] + theta[11] * log_d
    pl_nlos = theta[10] + theta[12] * log_d
    rho = scenario.los_weight
    pl_eff = rho * pl_los + (1.0 - rho) * pl_nlos
    shadow_margin = scenario.shadow_margin_scale * theta[8]
    noise_floor = THERMAL_NOISE_DBM_PER_HZ + 10.0 * math.log10(theta[16]) + theta[14]
    snr_db = theta[15] + theta[13] - pl_eff - shadow_margin - noise_floor
    return 10.0 ** (snr_db / 10.0)


def mac_parameters_from_theta(theta: np.ndarray, scenario: Scenario) -> MacParameters:
    """Broadcast the four common contention parameters over both networks."""
    theta = np.asarray(theta, dtype=float)
    return MacParameters.uniform(
        omega_w=theta[0],
        omega_l=theta[1],
        mu_w=theta[2],
        mu_l=theta[3],
        n_wifi=scenario.n_wifi,
        n_laa=scenario.n_laa,
    )


@dataclass
class ThroughputBreakdown:
    """Full evaluation record: throughputs plus the intermediate quantities."""

    f_wifi: float
    f_laa: float
    snr_wifi: float
    snr_laa: float
    slot_probs: np.ndarray
    state: ProbabilityState


class CoexistenceModel:
    """Deterministic map from a design vector to the two network throughputs.

    All methods are pure functions of their arguments and the frozen
    scenario/solver options, so instances are safe to share across threads.
    """

    def __init__(
        self,
        scenario: Scenario | None = None,
        domain: ParameterDomain | None = None,
        solver_options: SolverOptions | None = None,
        validate_bounds: bool = True,
    ):
        self.scenario = scenario or Scenario()
        self.domain = domain or default_domain()
        self.solver_options = solver_options or SolverOptions()
        self.validate_bounds = validate_bounds

    def evaluate(self, theta: np.ndarray, validate: bool | None = None) -> ThroughputBreakdown:
        theta = np.asarray(theta, dtype=float)
        if self.validate_bounds if validate is None else validate:
            self.domain.validate(theta)
        mac = mac_parameters_from_theta(theta, self.scenario)
        state = solve_probability_system(mac, self.solver_options)
        p_t = slot_probabilities(state)
        t = self.scenario.timing.as_array()
        cycle = float(t @ p_t)
        if cycle <= 0.0:
            raise DomainError("expected slot duration is nonpositive")
        snr_w = link_snr(theta, self.scenario, Network.WIFI)
        snr_l = link_snr(theta, self.scenario, Network.LAA)
        rate_w = math.log2(1.0 + snr_w)
        rate_l = math.log2(1.0 + snr_l)
        succ_w = float(state.p_w @ (1.0 - state.c_w))
        succ_l = float(state.p_l @ (1.0 - state.c_l))
        f_w = self.scenario.payload_wifi * rate_w * succ_w / cycle
        f_l = self.scenario.payload_laa * rate_l * succ_l / cycle
        return ThroughputBreakdown(
            f_wifi=f_w,
            f_laa=f_l,
            snr_wifi=snr_w,
            snr_laa=snr_l,
            slot_probs=p_t,
            state=state,
        )

    def throughput(self, theta: np.ndarray) -> tuple[float, float]:
        """(Wi-Fi, LAA) throughput pair for a raw design vector."""
        out = self.evaluate(theta)
        return out.f_wifi, out.f_laa

    def evaluate_unit(self, theta_unit: np.ndarray) -> ThroughputBreakdown:
        """Evaluate a design vector given in unit-cube coordinates.

        Tolerates the small face overhang produced by finite-difference
        stencils; bounds validation is the cube itself.
        """
        theta = self.domain.from_unit(theta_unit, strict=False)
        return self.evaluate(theta, validate=False)

    def throughput_unit(self, theta_unit: np.ndarray) -> tuple[float, float]:
        """Throughput pair for a design vector given in unit-cube coordinates."""
        out = self.evaluate_unit(theta_unit)
        return out.f_wifi, out.f_laa
