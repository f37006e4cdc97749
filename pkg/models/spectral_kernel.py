"""Spectral density, memory kernel and Markovian-limit coefficients.

All frequencies are measured in units of the mode frequency omega_0 and all
times in units of 1/omega_0. omega_0 is kept as an explicit field so that the
Markovian formulas read literally.
"""
import logging
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import special
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import ParameterError, QuadratureConvergenceError, QuadratureToleranceWarning

logger = logging.getLogger(__name__)

GAUSS_ORDER = 16
MIN_QUAD_NODES = 200
CUTOFF_FACTOR = 30.0
DEFAULT_QUAD_NODES = 400
DEFAULT_PV_NODES = 1600
PV_REL_TOL = 1e-6
# Geometric panels toward zero resolve the omega**n behaviour of sub-Ohmic baths.
_GEOMETRIC_LEVELS = 40
_TAIL_TERMS = 12
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class SpectralParams:
    """Bath coupling family J(w) = eta*w*(w/wc)**(n-1)*exp(-w/wc) and the mode frequency."""
    eta: float
    omega_c: float
    n: float = 1.0
    omega_0: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.eta) or self.eta < 0:
            raise ParameterError(f"eta must be >= 0, got {self.eta}")
        if not np.isfinite(self.omega_c) or self.omega_c <= 0:
            raise ParameterError(f"omega_c must be > 0, got {self.omega_c}")
        if not np.isfinite(self.n) or self.n <= 0:
            raise ParameterError(f"n must be > 0, got {self.n}")
        if not np.isfinite(self.omega_0) or self.omega_0 <= 0:
            raise ParameterError(f"omega_0 must be > 0, got {self.omega_0}")

    @classmethod
    def from_config(cls, config):
        return cls(
            eta=float(config.get('eta', 0.1)),
            omega_c=float(config.get('omega_c', 50.0)),
            n=float(config.get('n', 1.0)),
            omega_0=float(config.get('omega_0', 1.0)),
        )

    @property
    def classification(self):
        if self.n < 1:
            return 'sub-ohmic'
        if self.n == 1:
            return 'ohmic'
        return 'super-ohmic'

    @property
    def tau_E(self):
        """Environmental correlation time scale ~ 1/omega_c. Display only."""
        return 1.0 / self.omega_c

    @property
    def tau_0(self):
        """System time scale 1/omega_0. Display only."""
        return 1.0 / self.omega_0

    @property
    def total_weight(self):
        """Integral of J over [0, inf), which is also mu(0)."""
        return self.eta * special.gamma(self.n + 1.0) * self.omega_c ** 2

    def J(self, omega):
        return spectral_density(self, omega)


@dataclass(frozen=True)
class QuadratureConfig:
    """Node budget and upper frequency cutoff for the quadrature kernel."""
    nodes: int = DEFAULT_QUAD_NODES
    upper_cutoff: float = None

    def cutoff_for(self, params):
        if self.upper_cutoff is None:
            return CUTOFF_FACTOR * params.omega_c
        return float(self.upper_cutoff)

    def meets_tolerance_floor(self, params):
        return self.nodes >= MIN_QUAD_NODES and self.cutoff_for(params) >= CUTOFF_FACTOR * params.omega_c * (1 - 1e-12)


class KernelMode(str, Enum):
    CLOSED_FORM = 'closed_form'
    QUADRATURE = 'quadrature'
    DISCRETE_SUM = 'discrete_sum'


@dataclass(frozen=True, eq=False)
class Kernel:
    """The complex memory kernel mu(x) in one of its three realisations."""
    params: SpectralParams = None
    mode: KernelMode = KernelMode.CLOSED_FORM
    quad_cfg: QuadratureConfig = field(default_factory=QuadratureConfig)
    frequencies: np.ndarray = field(default=None, repr=False)
    weights: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'mode', KernelMode(self.mode))
        if self.mode is KernelMode.DISCRETE_SUM:
            if self.frequencies is None or self.weights is None:
                raise ParameterError("discrete-sum kernel needs mode frequencies and weights")
            frequencies = np.array(self.frequencies, dtype=float)
            weights = np.array(self.weights, dtype=float)
            if frequencies.shape != weights.shape or frequencies.ndim != 1:
                raise ParameterError("mode frequencies and weights must be 1-d arrays of equal length")
            if np.any(weights < 0):
                raise ParameterError("coupling weights |g_k|^2 must be non-negative")
            frequencies.setflags(write=False)
            weights.setflags(write=False)
            object.__setattr__(self, 'frequencies', frequencies)
            object.__setattr__(self, 'weights', weights)
        elif self.params is None:
            raise ParameterError(f"{self.mode.value} kernel needs SpectralParams")

    @classmethod
    def closed_form(cls, params):
        return cls(params=params, mode=KernelMode.CLOSED_FORM)

    @classmethod
    def quadrature(cls, params, quad_cfg=None):
        return cls(params=params, mode=KernelMode.QUADRATURE, quad_cfg=quad_cfg or QuadratureConfig())

    @classmethod
    def discrete_sum(cls, frequencies, weights, params=None):
        return cls(params=params, mode=KernelMode.DISCRETE_SUM, frequencies=frequencies, weights=weights)

    @property
    def modes_list(self):
        if self.mode is not KernelMode.DISCRETE_SUM:
            return []
        return list(zip(self.frequencies.tolist(), self.weights.tolist()))

    @property
    def tolerance_met(self):
        if self.mode is KernelMode.QUADRATURE:
            return self.quad_cfg.meets_tolerance_floor(self.params)
        return True

    @property
    def at_zero(self):
        """mu(0), real: the total coupling weight."""
        if self.mode is KernelMode.DISCRETE_SUM:
            return float(np.sum(self.weights))
        return float(np.real(self.evaluate(0.0)))

    def evaluate(self, x):
        if self.mode is KernelMode.CLOSED_FORM:
            return kernel_closed_form(self.params, x)
        if self.mode is KernelMode.QUADRATURE:
            return kernel_quadrature(self.params, x, self.quad_cfg)
        return kernel_discrete_sum(self.frequencies, self.weights, x)


@dataclass(frozen=True)
class MarkovianCoefficients:
    gamma_M: float
    delta_omega: float
    omega_M: float


@dataclass(frozen=True)
class BoundState:
    """Dressed mode below the bath continuum, if the coupling supports one."""
    exists: bool
    frequency: float = float('nan')
    residue: float = 0.0

    @property
    def steady_abs_u(self):
        return self.residue if self.exists else 0.0


def _as_output(values, scalar):
    return complex(values[()]) if scalar else values


def spectral_density(params, omega):
    """J(w) for the (sub/super-)Ohmic family. Accepts scalars or arrays."""
    omega_arr = np.asarray(omega, dtype=float)
    if np.any(omega_arr < 0) or np.any(np.isnan(omega_arr)):
        raise ParameterError("spectral density is defined for omega >= 0 only")
    scaled = omega_arr / params.omega_c
    with np.errstate(divide='ignore', invalid='ignore'):
        value = params.eta * omega_arr * np.power(scaled, params.n - 1.0) * np.exp(-scaled)
    value = np.where(omega_arr == 0, 0.0, value)
    if value.ndim == 0:
        return float(value)
    return value


def kernel_closed_form(params, x):
    """mu(x) = eta*Gamma(n+1)*wc**2 / (1 + i*wc*x)**(n+1)."""
    x_arr = np.asarray(x, dtype=float)
    values = params.total_weight / np.power(1.0 + 1j * params.omega_c * x_arr, params.n + 1.0)
    return _as_output(values, x_arr.ndim == 0)


def _composite_gauss_legendre(breaks, order=GAUSS_ORDER):
    base_x, base_w = np.polynomial.legendre.leggauss(order)
    left = breaks[:-1, None]
    right = breaks[1:, None]
    half = 0.5 * (right - left)
    nodes = (half * base_x + 0.5 * (left + right)).ravel()
    weights = (half * base_w).ravel()
    return nodes, weights


def _panel_breaks(scale, upper, panels, extra=()):
    """Geometric panels on (0, scale] followed by `panels` uniform panels up to `upper`."""
    geometric = scale * np.power(2.0, -np.arange(_GEOMETRIC_LEVELS, 0, -1, dtype=float))
    uniform = np.linspace(0.0, upper, int(panels) + 1)
    breaks = np.concatenate(([0.0], geometric, uniform, np.asarray(extra, dtype=float)))
    breaks = np.unique(breaks[(breaks >= 0) & (breaks <= upper)])
    return breaks


def _upper_tail(n, cutoff, s):
    """Asymptotic value of the integral of v**n * exp(-s*v) over [cutoff, inf)."""
    total = np.zeros_like(s)
    coefficient = 1.0
    for j in range(_TAIL_TERMS):
        total = total + coefficient * cutoff ** (n - j) / s ** (j + 1)
        coefficient *= (n - j)
        if coefficient == 0.0:
            break
    return np.exp(-s * cutoff) * total


def kernel_quadrature(params, x, quad_cfg=None):
    """mu(x) from composite Gauss-Legendre quadrature of J(w)exp(-iwx).

    In the scaled frequency v = w/wc the integrand is v**n * exp(-s*v) with
    s = 1 + i*wc*x. The contour is rotated onto the ray v = r*conj(s)/|s|, where
    the exponent is real and the integrand decays without oscillating. In
    t = |s|*r every x shares one set of nodes: panels geometric toward t = 0,
    so the result holds for any n > 0, and the region beyond the cutoff is
    added from its asymptotic expansion.
    """
    quad_cfg = quad_cfg or QuadratureConfig()
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    flat = np.atleast_1d(x_arr).ravel()
    if not quad_cfg.meets_tolerance_floor(params):
        warnings.warn(
            f"quadrature with {quad_cfg.nodes} nodes and cutoff {quad_cfg.cutoff_for(params):g} "
            f"is below the floor ({MIN_QUAD_NODES} nodes, {CUTOFF_FACTOR:g}*omega_c); "
            "the 1e-8 agreement with the closed form is not guaranteed",
            QuadratureToleranceWarning,
            stacklevel=2,
        )
    if params.eta == 0 or flat.size == 0:
        return _as_output(np.zeros(x_arr.shape, dtype=complex), scalar)

    cutoff = quad_cfg.cutoff_for(params) / params.omega_c
    panels = max(1, quad_cfg.nodes // GAUSS_ORDER)
    t, w = _composite_gauss_legendre(_panel_breaks(1.0, cutoff, panels))
    radial = float(np.power(t, params.n) * np.exp(-t) @ w)
    radial += float(_upper_tail(params.n, cutoff, np.ones(1))[0])

    s = 1.0 + 1j * params.omega_c * flat
    # (conj(s)/|s|)**(n+1) from the ray direction, |s|**-(n+1) from the change to t.
    ray = np.exp(-(params.n + 1.0) * (np.log(np.abs(s)) + 1j * np.angle(s)))
    out = params.eta * params.omega_c ** 2 * radial * ray
    return _as_output(out.reshape(x_arr.shape), scalar)


def kernel_discrete_sum(frequencies, weights, x):
    """mu(x) = sum_k |g_k|^2 exp(-i w_k x), evaluated in memory-bounded chunks."""
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    flat = np.atleast_1d(x_arr).ravel()
    frequencies = np.asarray(frequencies, dtype=float)
    weights = np.asarray(weights, dtype=float)
    out = np.empty(flat.shape, dtype=complex)
    step = max(1, _CHUNK_ELEMENTS // max(1, frequencies.size))
    for start in range(0, flat.size, step):
        chunk = flat[start:start + step]
        out[start:start + step] = np.exp(-1j * np.outer(chunk, frequencies)) @ weights
    return _as_output(out.reshape(x_arr.shape), scalar)


def _pv_tail(params, omega_max):
    # Bound on the part beyond omega_max, using 1/(w - w0) <= 1/(omega_max - w0).
    upper = special.gammaincc(params.n + 1.0, omega_max / params.omega_c)
    return params.total_weight * upper / (omega_max - params.omega_0)


def pv_integral(params, nodes=DEFAULT_PV_NODES, rel_tol=PV_REL_TOL):
    """Principal value of the integral of J(w)/(w - w0) over [0, inf).

    Singularity subtraction: (J(w) - J(w0))/(w - w0) is integrated as an
    ordinary integral over [0, omega_max], J(w0)*log((omega_max - w0)/w0) is the
    principal value of the subtracted pole, and the tail beyond omega_max is
    added from its bound. The regular part is computed at `nodes` and at twice
    as many; a relative disagreement above `rel_tol` raises.
    """
    if params.eta == 0:
        return 0.0
    w0 = params.omega_0
    omega_max = max(CUTOFF_FACTOR * params.omega_c, 10.0 * w0)
    j0 = spectral_density(params, w0)
    scale = min(w0, params.omega_c)

    def total(node_count):
        panels = max(1, node_count // GAUSS_ORDER)
        omega, weights = _composite_gauss_legendre(_panel_breaks(scale, omega_max, panels, extra=(w0,)))
        regular = weights @ ((spectral_density(params, omega) - j0) / (omega - w0))
        return regular + j0 * np.log((omega_max - w0) / w0) + _pv_tail(params, omega_max)

    coarse = total(nodes)
    fine = total(2 * nodes)
    floor = 1e-12 * params.total_weight
    if abs(fine - coarse) > rel_tol * max(abs(fine), floor):
        raise QuadratureConvergenceError(coarse, fine, rel_tol)
    return float(fine)


def pv_integral_ohmic_exact(params):
    """Closed form of the shift for n = 1: eta*(wc - w0*exp(-w0/wc)*Ei(w0/wc))."""
    if params.n != 1:
        raise ParameterError("the exponential-integral shift formula holds for n = 1 only")
    ratio = params.omega_0 / params.omega_c
    return float(params.eta * (params.omega_c - params.omega_0 * np.exp(-ratio) * special.expi(ratio)))


def pv_integral_cauchy_weight(params):
    """Independent cross-check through QUADPACK's Cauchy-weight rule."""
    if params.eta == 0:
        return 0.0
    omega_max = max(CUTOFF_FACTOR * params.omega_c, 10.0 * params.omega_0)
    value, _ = quad(lambda w: spectral_density(params, w), 0.0, omega_max,
                    weight='cauchy', wvar=params.omega_0, limit=400, epsabs=1e-13, epsrel=1e-11)
    return float(value + _pv_tail(params, omega_max))


def markovian_coefficients(params, nodes=DEFAULT_PV_NODES):
    gamma_M = float(np.pi * spectral_density(params, params.omega_0))
    delta_omega = pv_integral(params, nodes=nodes)
    return MarkovianCoefficients(gamma_M=gamma_M, delta_omega=delta_omega,
                                 omega_M=params.omega_0 - delta_omega)


def _moment(params, func, break_point):
    upper = max(CUTOFF_FACTOR * params.omega_c, 10.0 * params.omega_0, 10.0 * break_point)
    points = sorted({min(break_point, upper / 2), params.omega_c})
    value, _ = quad(lambda w: spectral_density(params, w) * func(w), 0.0, upper,
                    points=points, limit=500, epsabs=1e-14, epsrel=1e-12)
    return value


def bound_state(params):
    """Locate the dressed mode below the continuum, E = w0 - integral J(w)/(w - E).

    It exists when w0 < eta*wc*Gamma(n), the integral of J(w)/w. Its residue Z
    is the long-time limit of |u(t)|.
    """
    if params.eta == 0:
        return BoundState(exists=False)
    threshold = params.eta * params.omega_c * special.gamma(params.n)
    if params.omega_0 >= threshold:
        return BoundState(exists=False)

    def mismatch(energy):
        gap = -energy
        return energy - params.omega_0 + _moment(params, lambda w: 1.0 / (w + gap), gap)

    low = -(params.omega_0 + np.sqrt(params.total_weight) + 1.0)
    high = -1e-3 * params.omega_0
    for _ in range(60):
        if mismatch(high) > 0:
            break
        high *= 0.5
    else:
        logger.info("Bound state too close to the band edge to resolve; treating as absent.")
        return BoundState(exists=False)
    energy = brentq(mismatch, low, high, xtol=1e-14, rtol=1e-13)
    gap = -energy
    slope = _moment(params, lambda w: 1.0 / (w + gap) ** 2, gap)
    return BoundState(exists=True, frequency=float(energy), residue=float(1.0 / (1.0 + slope)))


class SpectralKernelModel:
    """Bath description: spectral density, memory kernel and Markovian limit."""
    def __init__(self, config):
        """
        Initializes the spectral model.

        Args:
            config (dict): Bath parameters. Expected keys: 'eta', 'omega_c', 'n',
                           'omega_0', and optionally 'kernel_mode'
                           ('closed_form' or 'quadrature') and 'quad_nodes'.
        """
        self.config = config
        self.params = SpectralParams.from_config(config)
        self.kernel_mode = KernelMode(config.get('kernel_mode', KernelMode.CLOSED_FORM.value))
        if self.kernel_mode is KernelMode.DISCRETE_SUM:
            raise ParameterError("discrete-sum kernels are built from a DiscreteBath, not from config")
        self.quad_cfg = QuadratureConfig(nodes=int(config.get('quad_nodes', DEFAULT_QUAD_NODES)))
        self._markovian = None
        logger.info("SpectralKernelModel initialized: eta=%g, omega_c=%g, n=%g (%s)",
                    self.params.eta, self.params.omega_c, self.params.n, self.params.classification)

    def kernel(self):
        if self.kernel_mode is KernelMode.QUADRATURE:
            return Kernel.quadrature(self.params, self.quad_cfg)
        return Kernel.closed_form(self.params)

    def markovian_coefficients(self):
        if self._markovian is None:
            self._markovian = markovian_coefficients(self.params)
            logger.info("Markovian limit: gamma_M=%.6g, delta_omega=%.6g",
                        self._markovian.gamma_M, self._markovian.delta_omega)
        return self._markovian

    def bound_state(self):
        return bound_state(self.params)
