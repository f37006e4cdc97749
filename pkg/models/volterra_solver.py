"""Amplitude u(t) of the memory-kernel equation u' + i*w0*u + (mu * u)(t) = 0, u(0) = 1."""
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, SolverStabilityError
from .spectral_kernel import markovian_coefficients

logger = logging.getLogger(__name__)

STABILITY_LIMIT = 1.0 + 1e-6
CONTRACTION_TOL = 1e-8
MAX_LEVELS = 6


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k*dt, k = 0..count-1, in units of 1/omega_0."""
    t_max: float
    dt: float

    def __post_init__(self):
        if not np.isfinite(self.dt) or self.dt <= 0:
            raise ParameterError(f"dt must be > 0, got {self.dt}")
        if not np.isfinite(self.t_max) or self.t_max < self.dt:
            raise ParameterError(f"t_max must be >= dt, got t_max={self.t_max}, dt={self.dt}")

    @property
    def count(self):
        return int(round(self.t_max / self.dt)) + 1

    @property
    def times(self):
        return np.arange(self.count) * self.dt

    def refined(self, factor):
        return TimeGrid(t_max=(self.count - 1) * self.dt, dt=self.dt / factor)


def _frozen(values):
    values = np.array(values, dtype=complex)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class AmplitudeSeries:
    """u(t) and u'(t) on a TimeGrid; u' comes from the equation, not from differencing."""
    grid: TimeGrid
    u: np.ndarray = field(repr=False)
    u_dot: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = _frozen(self.u)
        u_dot = _frozen(self.u_dot)
        if u.shape != (self.grid.count,) or u_dot.shape != u.shape:
            raise ParameterError(f"series length {u.shape} does not match grid count {self.grid.count}")
        object.__setattr__(self, 'u', u)
        object.__setattr__(self, 'u_dot', u_dot)

    @property
    def times(self):
        return self.grid.times

    @property
    def abs_u(self):
        return np.abs(self.u)


@dataclass(frozen=True)
class ConvergenceReport:
    """Self-refinement errors: `errors` vs the finest level (or the exact solution),
    `differences` between neighbouring levels, `orders` estimated from them."""
    dts: tuple
    errors: tuple
    differences: tuple
    orders: tuple
    against_exact: bool = False

    @property
    def observed_order(self):
        finite = [order for order in self.orders if np.isfinite(order)]
        return float(np.median(finite)) if finite else float('nan')

    @property
    def reduction_factors(self):
        """Shrink factor of the max error for each halving of dt."""
        source = self.errors if self.against_exact else self.differences
        return tuple(_ratio(a, b) for a, b in zip(source[:-1], source[1:]))


def default_dt(params):
    """min(1e-3, 0.05/omega_c, 0.05/sqrt(mu(0))), in units of 1/omega_0."""
    candidates = [1e-3, 0.05 / params.omega_c]
    weight = params.total_weight
    if weight > 0:
        candidates.append(0.05 / np.sqrt(weight))
    return float(min(candidates))


def solve_u(kernel, grid, omega_0=1.0):
    """Trapezoidal product integration of the memory equation.

    The free rotation is removed exactly, u = exp(-i*w0*t)*x, leaving
    x' = -(K * x)(t) with K(s) = mu(s)*exp(i*w0*s). Both the step and the
    memory integral use the trapezoidal rule; the diagonal weight K(0)*dt/2 is
    taken implicitly, so each step solves one scalar linear equation.

    Raises:
        SolverStabilityError: |u| exceeded 1 + 1e-6 at some step.
    """
    if not kernel.tolerance_met:
        logger.warning("Kernel quadrature settings are below the tolerance floor; solution accuracy is not guaranteed.")
    times = grid.times
    count = grid.count
    dt = grid.dt
    logger.info("Solving amplitude on %d points (dt=%g, %s kernel)...", count, dt, kernel.mode.value)

    rotation = np.exp(1j * omega_0 * times)
    memory = np.asarray(kernel.evaluate(times), dtype=complex) * rotation
    memory_rev = memory[::-1].copy()
    k0 = memory[0].real

    x = np.empty(count, dtype=complex)
    x_dot = np.empty(count, dtype=complex)
    x[0] = 1.0
    x_dot[0] = 0.0
    denominator = 1.0 + 0.25 * dt * dt * k0
    for k in range(1, count):
        history = 0.5 * memory[k] * x[0]
        if k > 1:
            history += np.dot(memory_rev[count - k:count - 1], x[1:k])
        x_k = (x[k - 1] + 0.5 * dt * x_dot[k - 1] - 0.5 * dt * dt * history) / denominator
        magnitude = abs(x_k)
        if magnitude > STABILITY_LIMIT:
            raise SolverStabilityError(step=k, time=k * dt, abs_u=magnitude, dt=dt)
        x[k] = x_k
        x_dot[k] = -dt * (history + 0.5 * k0 * x_k)

    phase = np.conj(rotation)
    u = phase * x
    u_dot = phase * (-1j * omega_0 * x + x_dot)
    u[0] = 1.0
    u_dot[0] = -1j * omega_0
    logger.info("Amplitude solved: final |u| = %.6g", abs(u[-1]))
    return AmplitudeSeries(grid=grid, u=u, u_dot=u_dot)


def markovian_u(params, grid, coefficients=None):
    """u(t) = exp(-i*(w0 - dw)*t - pi*J(w0)*t) from the Markovian coefficients."""
    coefficients = coefficients or markovian_coefficients(params)
    rate = coefficients.gamma_M + 1j * coefficients.omega_M
    u = np.exp(-rate * grid.times)
    return AmplitudeSeries(grid=grid, u=u, u_dot=-rate * u)


def _ratio(a, b):
    if b == 0:
        return float('nan')
    return float(a / b)


def convergence_study(kernel, base_grid, levels, omega_0=1.0, exact=None):
    """Solve on `levels` grids, halving dt each time, and estimate the order.

    Errors are max |u_level - u_finest| on the coarse points, or against
    `exact(t)` when a closed form is supplied. Orders come from the errors when
    `exact` is given, otherwise from differences of neighbouring levels, whose
    ratio is free of the finest level's own error.
    """
    if not 2 <= levels <= MAX_LEVELS:
        raise ParameterError(f"levels must be in [2, {MAX_LEVELS}], got {levels}")
    solutions = [solve_u(kernel, base_grid.refined(2 ** level), omega_0) for level in range(levels)]
    finest = solutions[-1].u

    errors = []
    for level, series in enumerate(solutions):
        if exact is not None:
            errors.append(float(np.max(np.abs(series.u - exact(series.times)))))
        else:
            stride = 2 ** (levels - 1 - level)
            errors.append(float(np.max(np.abs(series.u - finest[::stride]))))

    differences = [float(np.max(np.abs(coarse.u - fine.u[::2])))
                   for coarse, fine in zip(solutions[:-1], solutions[1:])]
    source = errors if exact is not None else differences
    orders = []
    for a, b in zip(source[:-1], source[1:]):
        ratio = _ratio(a, b)
        orders.append(float(np.log2(ratio)) if ratio > 0 else float('nan'))
    report = ConvergenceReport(
        dts=tuple(s.grid.dt for s in solutions),
        errors=tuple(errors),
        differences=tuple(differences),
        orders=tuple(orders),
        against_exact=exact is not None,
    )
    logger.info("Convergence study: errors=%s, orders=%s", report.errors, report.orders)
    return report


class AmplitudeSolverModel:
    """Steps the memory equation on a uniform grid."""
    def __init__(self, config):
        """
        Args:
            config (dict): 't_max' and 'dt' of the grid, and 'omega_0'.
        """
        self.config = config
        self.omega_0 = float(config.get('omega_0', 1.0))
        self.grid = TimeGrid(t_max=float(config.get('t_max', 10.0)), dt=float(config.get('dt', 1e-3)))
        logger.info("AmplitudeSolverModel initialized: %d grid points, dt=%g", self.grid.count, self.grid.dt)

    def solve(self, kernel):
        return solve_u(kernel, self.grid, self.omega_0)

    def markovian(self, params, coefficients=None):
        return markovian_u(params, self.grid, coefficients)

    def convergence(self, kernel, levels=3, exact=None):
        return convergence_study(kernel, self.grid, levels, self.omega_0, exact)
