"""Time-dependent master-equation coefficients from u'/u = -Gamma(t) - i*Omega(t)."""
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .volterra_solver import TimeGrid

logger = logging.getLogger(__name__)

DEFAULT_EPSILON_U = 1e-6


def _frozen(values, dtype):
    values = np.array(values, dtype=dtype)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class CoefficientSeries:
    """Gamma(t), Omega(t) and dw(t) = w0 - Omega(t); NaN wherever `valid` is False."""
    grid: TimeGrid
    gamma: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    delta_omega: np.ndarray = field(repr=False)
    valid: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name, dtype in (('gamma', float), ('omega', float), ('delta_omega', float), ('valid', bool)):
            object.__setattr__(self, name, _frozen(getattr(self, name), dtype))

    @property
    def times(self):
        return self.grid.times

    def window(self, t_lo, t_hi):
        times = self.times
        return (times >= t_lo - 1e-12) & (times <= t_hi + 1e-12)


@dataclass(frozen=True)
class RateStatistics:
    mean_gamma: float
    mean_abs_gamma: float
    mean_delta_omega: float
    sign_changes: int
    valid_fraction: float


def extract_rates(series, epsilon_u=DEFAULT_EPSILON_U, omega_0=1.0):
    """Gamma = -Re(u'/u), Omega = -Im(u'/u) where |u| >= epsilon_u.

    Near zeros of u both coefficients are genuinely singular; those points are
    flagged invalid instead of being filled in.
    """
    if epsilon_u <= 0:
        raise ParameterError(f"epsilon_u must be > 0, got {epsilon_u}")
    u = series.u
    valid = np.abs(u) >= epsilon_u
    ratio = np.full(u.shape, np.nan + 1j * np.nan, dtype=complex)
    ratio[valid] = series.u_dot[valid] / u[valid]
    # + 0.0 turns the -0.0 of a zero rate into 0.0.
    gamma = -ratio.real + 0.0
    omega = -ratio.imag + 0.0
    delta_omega = omega_0 - omega
    invalid = int(np.count_nonzero(~valid))
    if invalid:
        logger.info("%d grid points with |u| < %g flagged invalid", invalid, epsilon_u)
    return CoefficientSeries(grid=series.grid, gamma=gamma, omega=omega,
                             delta_omega=delta_omega, valid=valid)


def valid_prefix(coeffs):
    """Number of leading grid points that are all valid."""
    invalid = np.flatnonzero(~coeffs.valid)
    return int(invalid[0]) if invalid.size else int(coeffs.valid.size)


def rate_statistics(coeffs, t_lo, t_hi):
    """Window diagnostics: means of Gamma, |Gamma|, dw and the number of sign changes of Gamma."""
    mask = coeffs.window(t_lo, t_hi)
    usable = mask & coeffs.valid
    if not np.any(usable):
        raise ParameterError(f"no valid coefficients on [{t_lo}, {t_hi}]")
    gamma = coeffs.gamma[usable]
    signs = np.sign(gamma)
    signs = signs[signs != 0]
    return RateStatistics(
        mean_gamma=float(np.mean(gamma)),
        mean_abs_gamma=float(np.mean(np.abs(gamma))),
        mean_delta_omega=float(np.mean(coeffs.delta_omega[usable])),
        sign_changes=int(np.count_nonzero(signs[1:] != signs[:-1])),
        valid_fraction=float(np.count_nonzero(usable) / np.count_nonzero(mask)),
    )


class MasterEquationCoefficientsModel:
    """Decay rate and shifted frequency of the generalized master equation."""
    def __init__(self, config):
        """
        Args:
            config (dict): 'epsilon_u' validity cutoff and 'omega_0'.
        """
        self.epsilon_u = float(config.get('epsilon_u', DEFAULT_EPSILON_U))
        self.omega_0 = float(config.get('omega_0', 1.0))
        logger.info("MasterEquationCoefficientsModel initialized (epsilon_u=%g)", self.epsilon_u)

    def extract(self, series):
        return extract_rates(series, self.epsilon_u, self.omega_0)

    def statistics(self, coeffs, t_lo, t_hi):
        return rate_statistics(coeffs, t_lo, t_hi)
