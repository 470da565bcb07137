"""Exception hierarchy shared across the package."""


class ParetoTraceError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ParetoTraceError, ValueError):
    """An input violates a documented precondition (bounds, ranges, shapes)."""


class DimensionError(ParetoTraceError, ValueError):
    """Array dimensions are inconsistent with the requested operation."""


class ConfigError(ParetoTraceError, ValueError):
    """A run configuration is malformed or self-inconsistent."""


class SolverError(ParetoTraceError, RuntimeError):
    """The nonlinear probability solve failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class GeometryError(ParetoTraceError, RuntimeError):
    """A geometric construction is degenerate (hull, triangulation, geodesic)."""


class IntegrationError(ParetoTraceError, RuntimeError):
    """ODE integration hit a singular Hessian combination."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class OptimizationError(ParetoTraceError, RuntimeError):
    """Every restart of a derivative-free search failed."""
