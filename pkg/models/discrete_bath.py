"""Brute-force oracles: a finite bath in the single-excitation sector, and a
truncated Fock-space propagation of the time-dependent master equation."""
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import special
from scipy.integrate import solve_ivp

from .cat_state import CatState, cat_density_matrix, evolve_cat
from .errors import BathRecurrenceError, OracleError, ParameterError
from .spectral_kernel import CUTOFF_FACTOR, Kernel, kernel_discrete_sum
from .volterra_solver import AmplitudeSeries

logger = logging.getLogger(__name__)

NORM_TOL = 1e-8
TRACE_TOL = 1e-8
WEIGHT_REL_TOL = 1e-6
# Largest phase advanced by one RK4 substep.
_MAX_PHASE_PER_STEP = 0.05
_FOCK_RTOL = 1e-10
_FOCK_ATOL = 1e-12


class BathScheme(str, Enum):
    MIDPOINT = 'midpoint'
    GAUSS_LEGENDRE = 'gauss_legendre'
    MANUAL = 'manual'


@dataclass(frozen=True, eq=False)
class DiscreteBath:
    """Finite set of bath modes (w_k, |g_k|^2) standing in for the continuum."""
    frequencies: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    omega_max: float
    scheme: BathScheme = BathScheme.MIDPOINT
    params: object = None

    def __post_init__(self):
        frequencies = np.array(self.frequencies, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if frequencies.ndim != 1 or frequencies.shape != weights.shape or frequencies.size == 0:
            raise ParameterError("a bath needs equally long, non-empty frequency and weight arrays")
        if np.any(frequencies <= 0) or np.any(frequencies > self.omega_max * (1 + 1e-12)):
            raise ParameterError("mode frequencies must lie in (0, omega_max]")
        if np.any(weights < 0):
            raise ParameterError("coupling weights must be non-negative")
        frequencies.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, 'frequencies', frequencies)
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'scheme', BathScheme(self.scheme))

    @classmethod
    def single_mode(cls, omega, weight):
        """One mode at `omega` with |g|^2 = `weight`: the vacuum Rabi fixture."""
        return cls(frequencies=[omega], weights=[weight], omega_max=omega, scheme=BathScheme.MANUAL)

    @property
    def modes(self):
        return list(zip(self.frequencies.tolist(), self.weights.tolist()))

    @property
    def count(self):
        return int(self.frequencies.size)

    @property
    def total_weight(self):
        return float(np.sum(self.weights))

    @property
    def recurrence_time(self):
        """2*pi over the smallest mode spacing; infinite for a single mode."""
        if self.count < 2:
            return float('inf')
        spacing = np.min(np.diff(np.sort(self.frequencies)))
        return float(2 * np.pi / spacing) if spacing > 0 else 0.0

    def kernel(self):
        """The discrete-sum memory kernel of exactly these modes."""
        return Kernel.discrete_sum(self.frequencies, self.weights, self.params)


@dataclass(frozen=True, eq=False)
class OracleRun:
    series: AmplitudeSeries
    max_norm_drift: float
    method: str


@dataclass(frozen=True, eq=False)
class FockPropagation:
    """Per-grid-point observables of the propagated truncated density matrix."""
    times: np.ndarray = field(repr=False)
    purity: np.ndarray = field(repr=False)
    trace: np.ndarray = field(repr=False)
    photon_number: np.ndarray = field(repr=False)


def _required_count(scheme, omega_max, horizon):
    if scheme is BathScheme.GAUSS_LEGENDRE:
        # Smallest Gauss-Legendre spacing ~ 0.625*pi^2*omega_max/(count + 1/2)^2.
        return int(np.ceil(np.sqrt(0.3125 * np.pi * omega_max * horizon))) + 1
    return int(np.ceil(omega_max * horizon / (2 * np.pi))) + 1


def _cell_weights(params, edges):
    # Exact integral of J over each cell, through the regularized incomplete gamma.
    cumulative = special.gammainc(params.n + 1.0, edges / params.omega_c)
    return params.total_weight * np.diff(cumulative)


def discretize_bath(params, count, omega_max=None, horizon=None, scheme=BathScheme.MIDPOINT):
    """Sample the continuum bath on `count` modes in (0, omega_max].

    Midpoint: w_k = (k + 1/2)*dw with |g_k|^2 the integral of J over the cell,
    which equals J(w_k)*dw up to O(dw^3) and keeps the total weight exact.
    Gauss-Legendre: nodes and weights of the Gauss rule on [0, omega_max].

    Raises:
        BathRecurrenceError: 2*pi/min spacing does not exceed `horizon`.
    """
    scheme = BathScheme(scheme)
    if count < 2:
        raise ParameterError(f"a sampled bath needs count >= 2, got {count}")
    if scheme is BathScheme.MANUAL:
        raise ParameterError("manual baths are built with DiscreteBath.single_mode or the constructor")
    omega_max = float(omega_max) if omega_max is not None else CUTOFF_FACTOR * params.omega_c
    if omega_max < CUTOFF_FACTOR * params.omega_c:
        logger.warning("omega_max=%g is below %g*omega_c; the truncated spectral tail biases the oracle",
                       omega_max, CUTOFF_FACTOR)

    if scheme is BathScheme.MIDPOINT:
        edges = np.linspace(0.0, omega_max, count + 1)
        frequencies = 0.5 * (edges[:-1] + edges[1:])
        weights = _cell_weights(params, edges)
    else:
        nodes, gauss_weights = np.polynomial.legendre.leggauss(count)
        frequencies = 0.5 * omega_max * (nodes + 1.0)
        weights = params.J(frequencies) * gauss_weights * 0.5 * omega_max

    bath = DiscreteBath(frequencies=frequencies, weights=weights, omega_max=omega_max,
                        scheme=scheme, params=params)
    if horizon is not None and bath.recurrence_time <= horizon:
        raise BathRecurrenceError(bath.recurrence_time, horizon, _required_count(scheme, omega_max, horizon))

    expected = params.total_weight * special.gammainc(params.n + 1.0, omega_max / params.omega_c)
    if expected > 0 and abs(bath.total_weight - expected) > WEIGHT_REL_TOL * expected:
        logger.warning("bath weight %.10g differs from the integral of J %.10g beyond %g",
                       bath.total_weight, expected, WEIGHT_REL_TOL)
    logger.info("Discretized bath: %d %s modes up to %g, recurrence time %.4g",
                count, scheme.value, omega_max, bath.recurrence_time)
    return bath


def _rk4_amplitude(bath, omega_0, grid):
    couplings = np.sqrt(bath.weights)
    frequencies = bath.frequencies
    fastest = max(omega_0, float(np.max(frequencies)), np.sqrt(bath.total_weight))
    substeps = max(1, int(np.ceil(fastest * grid.dt / _MAX_PHASE_PER_STEP)))
    h = grid.dt / substeps

    def rhs(c0, modes):
        return (-1j * (omega_0 * c0 + couplings @ modes),
                -1j * (frequencies * modes + couplings * c0))

    c0 = 1.0 + 0j
    modes = np.zeros(bath.count, dtype=complex)
    u = np.empty(grid.count, dtype=complex)
    u_dot = np.empty(grid.count, dtype=complex)
    u[0], u_dot[0] = c0, -1j * omega_0
    max_drift = 0.0
    for k in range(1, grid.count):
        for _ in range(substeps):
            a0, am = rhs(c0, modes)
            b0, bm = rhs(c0 + 0.5 * h * a0, modes + 0.5 * h * am)
            d0, dm = rhs(c0 + 0.5 * h * b0, modes + 0.5 * h * bm)
            e0, em = rhs(c0 + h * d0, modes + h * dm)
            c0 = c0 + h / 6.0 * (a0 + 2 * b0 + 2 * d0 + e0)
            modes = modes + h / 6.0 * (am + 2 * bm + 2 * dm + em)
        drift = abs(abs(c0) ** 2 + float(np.vdot(modes, modes).real) - 1.0)
        max_drift = max(max_drift, drift)
        if drift > NORM_TOL:
            raise OracleError(f"excitation norm drifted by {drift:.3g} at t={k * grid.dt:.6g}; "
                              f"reduce dt below {grid.dt / 2:.3g}")
        u[k] = c0
        u_dot[k] = rhs(c0, modes)[0]
    return u, u_dot, max_drift


def _eigen_amplitude(bath, omega_0, grid):
    size = bath.count + 1
    hamiltonian = np.zeros((size, size))
    hamiltonian[0, 0] = omega_0
    hamiltonian[0, 1:] = np.sqrt(bath.weights)
    hamiltonian[1:, 0] = np.sqrt(bath.weights)
    hamiltonian[np.arange(1, size), np.arange(1, size)] = bath.frequencies
    energies, vectors = np.linalg.eigh(hamiltonian)
    overlaps = np.abs(vectors[0]) ** 2
    times = grid.times
    # c0(t) = sum_j |V_0j|^2 exp(-i E_j t); the derivative weights pick up E_j.
    u = kernel_discrete_sum(energies, overlaps, times)
    u_dot = -1j * kernel_discrete_sum(energies, energies * overlaps, times)
    return u, u_dot, abs(float(np.sum(overlaps)) - 1.0)


def run_oracle(bath, omega_0, grid, method='rk4'):
    """Evolve the (count+1)-amplitude single-excitation system from c0 = 1.

    `rk4` integrates dc0/dt = -i w0 c0 - i sum_k g_k c_k, dc_k/dt = -i w_k c_k - i g_k c0
    with the classical fourth-order method; `eigh` diagonalizes the same
    Hamiltonian exactly.
    """
    logger.info("Running %s oracle: %d modes, %d grid points", method, bath.count, grid.count)
    if method == 'rk4':
        u, u_dot, drift = _rk4_amplitude(bath, omega_0, grid)
    elif method == 'eigh':
        u, u_dot, drift = _eigen_amplitude(bath, omega_0, grid)
    else:
        raise ParameterError(f"unknown oracle method {method!r}")
    u[0] = 1.0
    u_dot[0] = -1j * omega_0
    return OracleRun(series=AmplitudeSeries(grid=grid, u=u, u_dot=u_dot), max_norm_drift=drift, method=method)


def oracle_amplitude(bath, omega_0, grid, method='rk4'):
    return run_oracle(bath, omega_0, grid, method).series


def _master_rhs(rho, gamma, omega, number_diff, number_sum, jump_scale):
    jumped = np.zeros_like(rho)
    jumped[:-1, :-1] = jump_scale * rho[1:, 1:]
    return -1j * omega * number_diff * rho + gamma * (2.0 * jumped - number_sum * rho)


def fock_master_propagation(coeffs, initial, n_max, t_end=None):
    """Propagate rho' = -i*Omega[a^dag a, rho] + Gamma(2 a rho a^dag - a^dag a rho - rho a^dag a).

    Integrated with `solve_ivp` at no more than one grid step per step; Gamma
    and Omega are interpolated linearly between grid points. Propagation covers
    [0, t_end] (the whole grid by default) and refuses to cross invalid
    coefficients.
    """
    if not isinstance(initial, CatState):
        initial = CatState(beta0=initial)
    times = coeffs.times
    last = coeffs.grid.count - 1 if t_end is None else min(coeffs.grid.count - 1, int(round(t_end / coeffs.grid.dt)))
    invalid = np.flatnonzero(~coeffs.valid[:last + 1])
    if invalid.size:
        raise OracleError(f"coefficients are invalid at t={times[invalid[0]]:.6g}, inside the propagation window")

    rho0 = cat_density_matrix(evolve_cat(initial, 1.0), n_max)
    size = n_max + 1
    number = np.arange(size, dtype=float)
    number_diff = number[:, None] - number[None, :]
    number_sum = number[:, None] + number[None, :]
    root = np.sqrt(number[1:])
    jump_scale = np.outer(root, root)
    window = times[:last + 1]
    gamma, omega = coeffs.gamma[:last + 1], coeffs.omega[:last + 1]

    def rhs(t, y):
        rho = y.reshape(size, size)
        g = np.interp(t, window, gamma)
        w = np.interp(t, window, omega)
        return _master_rhs(rho, g, w, number_diff, number_sum, jump_scale).ravel()

    if last == 0:
        states = rho0.reshape(1, size, size)
    else:
        solution = solve_ivp(rhs, (window[0], window[-1]), rho0.ravel(), t_eval=window,
                             rtol=_FOCK_RTOL, atol=_FOCK_ATOL, max_step=coeffs.grid.dt)
        if not solution.success:
            raise OracleError(f"master-equation propagation failed: {solution.message}")
        states = solution.y.T.reshape(-1, size, size)

    purity = np.sum(np.abs(states) ** 2, axis=(1, 2))
    trace = np.trace(states, axis1=1, axis2=2).real
    photons = np.diagonal(states, axis1=1, axis2=2).real @ number
    drift = np.abs(trace - trace[0])
    if np.any(drift > TRACE_TOL):
        k = int(np.argmax(drift > TRACE_TOL))
        raise OracleError(f"trace drifted to {trace[k]:.12g} at t={window[k]:.6g}")
    return FockPropagation(times=window, purity=purity, trace=trace, photon_number=photons)


class DiscreteBathModel:
    """Finite-bath and Fock-space oracles for cross-checking the solver."""
    def __init__(self, config):
        """
        Args:
            config (dict): 'oracle_modes', 'oracle_omega_max', 'oracle_scheme',
                           'oracle_method' ('rk4' or 'eigh'), 'omega_0'.
        """
        self.count = int(config.get('oracle_modes', 2000))
        self.omega_max = config.get('oracle_omega_max')
        self.scheme = BathScheme(config.get('oracle_scheme', BathScheme.MIDPOINT.value))
        self.method = config.get('oracle_method', 'rk4')
        self.omega_0 = float(config.get('omega_0', 1.0))
        logger.info("DiscreteBathModel initialized: %d %s modes", self.count, self.scheme.value)

    def build(self, params, horizon):
        return discretize_bath(params, self.count, self.omega_max, horizon, self.scheme)

    def amplitude(self, bath, grid):
        return run_oracle(bath, self.omega_0, grid, self.method)

    def propagate(self, coeffs, cat, n_max, t_end=None):
        return fock_master_propagation(coeffs, cat, n_max, t_end)
