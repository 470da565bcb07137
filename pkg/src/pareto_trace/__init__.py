"""Trade-off curves between two coexisting unlicensed-band networks.

Analytic saturation throughput model for a Wi-Fi / LAA pair, gradient-based
subspace reduction, PSD-constrained quadratic surrogates, and closed-form
Pareto tracing with geodesic, linear, and conditional front construction.
"""

__version__ = "0.1.0"

from .config import RunConfig, config_from_dict, load_config
from .domain import (
    NOMINAL_THETA,
    PARAMETER_NAMES,
    PARAMETER_TABLE,
    ParameterDomain,
    UnitCubeScaler,
    default_domain,
)
from .exceptions import (
    ConfigError,
    DimensionError,
    DomainError,
    GeometryError,
    IntegrationError,
    OptimizationError,
    ParetoTraceError,
    SolverError,
)
from .fronts import (
    FrontCurve,
    conditional_front,
    geodesic_front,
    inactive_endpoints,
    linear_front,
    nondominated,
)
from .geometry import (
    InactiveSampler,
    StretchSamples,
    Zonotope2D,
    convex_hull_2d,
    delaunay_triangulation,
    sample_inactive,
    stretch_sample,
    zonotope_vertices,
)
from .mac import (
    MacParameters,
    ProbabilityState,
    SolverOptions,
    bianchi_probability,
    collision_probabilities,
    slot_probabilities,
    solve_probability_system,
)
from .model import CoexistenceModel, Network, Scenario, ThroughputBreakdown, TimingVector, link_snr
from .pipeline import Pipeline, STAGES
from .sampling import SampleSet, evaluate_batch, fd_gradient, sample_uniform
from .subspace import (
    ActiveSubspace,
    MixedSubspace,
    estimate_c_matrix,
    grassmann_geodesic,
    mix_subspaces,
    shadow_data,
    subspace_distance,
)
from .surrogate import PSDQuadraticSurrogate, fit_psd_quadratic, polynomial_r2_table, r_squared
from .trace import (
    TraceCurve,
    UnitCube,
    condition_profile,
    maximize_throughput,
    ode_trace,
    quadratic_trace,
    rk4_path,
)
