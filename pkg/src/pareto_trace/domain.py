"""Design-parameter domain: bounds, scaling modes, and the unit-cube transform.

The 17 MAC+PHY design variables live in a box whose bounds span several
orders of magnitude and mixed units.  All sampling, gradient estimation and
surrogate fitting happens in a centered unit cube [-1, 1]^17; parameters
whose lower bound is positive are mapped through a log transform (so that
quantities entering the model as exponents become coefficients), the rest
affinely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DimensionError, DomainError

LOG = "log"
LINEAR = "linear"

#: (name, lower, upper, nominal) for the 17 design variables, in model order.
PARAMETER_TABLE = [
    ("wifi_min_cw", 8.0, 1024.0, 516.0),
    ("laa_min_cw", 8.0, 1024.0, 516.0),
    ("wifi_max_backoff", 0.0, 8.0, 4.0),
    ("laa_max_backoff", 0.0, 8.0, 4.0),
    ("tx_tx_distance_m", 10.0, 20.0, 15.0),
    ("tx_rx_distance_m", 10.0, 35.0, 22.5),
    ("tx_height_m", 3.0, 6.0, 4.5),
    ("rx_height_m", 1.0, 1.5, 1.25),
    ("shadow_std_db", 8.03, 8.29, 8.16),
    ("pathloss_k_los_db", 45.12, 46.38, 45.75),
    ("pathloss_k_nlos_db", 34.70, 46.38, 40.54),
    ("pathloss_alpha_los", 17.3, 21.5, 19.4),
    ("pathloss_alpha_nlos", 31.9, 38.3, 35.1),
    ("antenna_gain_dbi", 0.0, 5.0, 2.5),
    ("noise_figure_db", 5.0, 9.0, 7.0),
    ("tx_power_dbm", 18.0, 23.0, 20.5),
    ("bandwidth_hz", 10.0e6, 20.0e6, 15.0e6),
]

PARAMETER_NAMES = [row[0] for row in PARAMETER_TABLE]
NOMINAL_THETA = np.array([row[3] for row in PARAMETER_TABLE])
N_PARAMETERS = len(PARAMETER_TABLE)


def _shape_error(shape, dim) -> DimensionError:
    return DimensionError(f"expected vectors of length {dim}, got shape {shape}")


@dataclass
class ParameterDomain:
    """Box bounds plus a per-entry scaling mode ("log" or "linear")."""

    lower: np.ndarray
    upper: np.ndarray
    scale: list[str] | None = None
    names: list[str] | None = None

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise DomainError("lower/upper bounds must be 1-d arrays of equal length")
        if np.any(self.lower >= self.upper):
            bad = int(np.argmax(self.lower >= self.upper))
            raise DomainError(f"bound {bad} has lower >= upper")
        if self.scale is None:
            # Log scaling is only defined for strictly positive ranges.
            self.scale = [LOG if lo > 0 else LINEAR for lo in self.lower]
        if len(self.scale) != self.dim:
            raise DomainError("scale list length does not match bounds")
        for mode, lo in zip(self.scale, self.lower):
            if mode not in (LOG, LINEAR):
                raise DomainError(f"unknown scale mode {mode!r}")
            if mode == LOG and lo <= 0:
                raise DomainError("log scaling requires a positive lower bound")
        if self.names is None:
            self.names = [f"theta_{i + 1}" for i in range(self.dim)]
        self._is_log = np.array([m == LOG for m in self.scale])
        safe_lo = np.where(self._is_log, self.lower, 1.0)
        safe_hi = np.where(self._is_log, self.upper, 1.0)
        self._log_lo = np.log(safe_lo)
        self._log_hi = np.log(safe_hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    def validate(self, theta: np.ndarray) -> np.ndarray:
        """Check a raw parameter vector against the (inclusive) bounds."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dim,):
            raise _shape_error(theta.shape, self.dim)
        if not np.all(np.isfinite(theta)):
            raise DomainError("parameter vector contains non-finite entries")
        tol = 1e-12 * np.maximum(1.0, np.abs(self.upper))
        bad = (theta < self.lower - tol) | (theta > self.upper + tol)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise DomainError(
                f"parameter {i + 1} ({self.names[i]}) = {theta[i]:g} outside "
                f"bounds [{self.lower[i]:g}, {self.upper[i]:g}]"
            )
        return theta

    def to_unit(self, theta: np.ndarray) -> np.ndarray:
        """Map raw parameters (within bounds) to the centered cube [-1, 1]^D.

        Log entries land at 0 when the parameter sits at the geometric mean
        of its bounds; linear entries at the midpoint.
        """
        theta = np.asarray(theta, dtype=float)
        squeeze = theta.ndim == 1
        theta = np.atleast_2d(theta)
        if theta.shape[1] != self.dim:
            raise _shape_error(theta.shape, self.dim)
        for row in theta:
            self.validate(row)
        unit = np.empty_like(theta)
        log = self._is_log
        span = self._log_hi[log] - self._log_lo[log]
        unit[:, log] = 2.0 * (np.log(theta[:, log]) - self._log_lo[log]) / span - 1.0
        lin = ~log
        unit[:, lin] = 2.0 * (theta[:, lin] - self.lower[lin]) / (self.upper[lin] - self.lower[lin]) - 1.0
        unit = np.clip(unit, -1.0, 1.0)
        return unit[0] if squeeze else unit

    def from_unit(self, unit: np.ndarray, strict: bool = True) -> np.ndarray:
        """Exact inverse of :meth:`to_unit` (results clipped to the bounds).

        With ``strict=False`` a small overhang past the cube faces (up to
        1e-3, as produced by finite-difference stencils at the boundary) is
        mapped smoothly instead of clipped.
        """
        unit = np.asarray(unit, dtype=float)
        squeeze = unit.ndim == 1
        unit = np.atleast_2d(unit)
        if unit.shape[1] != self.dim:
            raise _shape_error(unit.shape, self.dim)
        overhang = 1e-9 if strict else 1e-3
        if np.any(np.abs(unit) > 1.0 + overhang):
            raise DomainError("unit coordinates must lie in [-1, 1]")
        theta = np.empty_like(unit)
        log = self._is_log
        span = self._log_hi[log] - self._log_lo[log]
        theta[:, log] = np.exp(self._log_lo[log] + 0.5 * (unit[:, log] + 1.0) * span)
        lin = ~log
        theta[:, lin] = self.lower[lin] + 0.5 * (unit[:, lin] + 1.0) * (self.upper[lin] - self.lower[lin])
        if strict:
            theta = np.clip(theta, self.lower, self.upper)
        return theta[0] if squeeze else theta


def default_domain() -> ParameterDomain:
    """The shipped 17-parameter domain with documented bounds and scaling."""
    lower = np.array([row[1] for row in PARAMETER_TABLE])
    upper = np.array([row[2] for row in PARAMETER_TABLE])
    return ParameterDomain(lower=lower, upper=upper, names=list(PARAMETER_NAMES))


class UnitCubeScaler(BaseEstimator, TransformerMixin):
    """Transformer view of a :class:`ParameterDomain` for pipeline use.

    ``transform`` maps raw parameter rows to the centered unit cube and
    ``inverse_transform`` maps back; the mapping is fixed by the domain, so
    ``fit`` only records the expected feature count.
    """

    def __init__(self, domain: ParameterDomain | None = None):
        self.domain = domain

    def fit(self, X, y=None):
        X = check_array(X)
        self.domain_ = self.domain if self.domain is not None else default_domain()
        if X.shape[1] != self.domain_.dim:
            raise _shape_error(X.shape, self.domain_.dim)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "domain_")
        X = check_array(X)
        return self.domain_.to_unit(X)

    def inverse_transform(self, X):
        check_is_fitted(self, "domain_")
        X = check_array(X)
        return self.domain_.from_unit(X)
