"""Schrodinger-cat evolution through the effective propagating function.

Two coherent-state conventions meet here. The propagating function acts on
Bargmann (unnormalized) kets ||b> = exp(|b|^2/2)|b>; everything returned to
callers is expressed with normalized kets |b>. `_bargmann_to_normalized` is the
one place where a Bargmann dyad coefficient is converted.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import OracleError, ParameterError

logger = logging.getLogger(__name__)

CONTRACTION_TOL = 1e-8
FOCK_TAIL_TOL = 1e-12
DEFAULT_N_MAX = 24


@dataclass(frozen=True)
class CatState:
    """(||b0> + ||-b0>)(<<b0|| + <<-b0||)/N with N = 2(exp(|b0|^2) + exp(-|b0|^2))."""
    beta0: complex

    def __post_init__(self):
        beta0 = complex(self.beta0)
        if not (np.isfinite(beta0.real) and np.isfinite(beta0.imag)):
            raise ParameterError(f"beta0 must be finite, got {self.beta0}")
        object.__setattr__(self, 'beta0', beta0)

    @property
    def norm_N(self):
        a = abs(self.beta0) ** 2
        return 2.0 * (np.exp(a) + np.exp(-a))


@dataclass(frozen=True)
class DyadImage:
    """Image of the dyad ||beta><<gamma|| under the propagating function.

    `scale` multiplies the Bargmann dyad ||beta_out><<gamma_out||;
    `normalized_weight` multiplies |beta_out><gamma_out| when the input was the
    normalized dyad |beta><gamma|.
    """
    scale: complex
    beta_out: complex
    gamma_out: complex
    normalized_weight: complex


@dataclass(frozen=True)
class EvolvedCat:
    beta0: complex
    u_t: complex
    beta: complex
    diag_weight: float
    cross_weight: float
    purity: float

    @property
    def normalized_diag_weight(self):
        """Coefficient of |b><b| and |-b><-b| with normalized kets."""
        return _bargmann_to_normalized(self.diag_weight, self.beta, self.beta)

    @property
    def normalized_cross_weight(self):
        """Coefficient of |b><-b| and |-b><b| with normalized kets."""
        return _bargmann_to_normalized(self.cross_weight, self.beta, -self.beta).real


def _bargmann_to_normalized(coefficient, ket, bra):
    # ||k><<b|| = exp((|k|^2 + |b|^2)/2) |k><b|
    return coefficient * np.exp(0.5 * (abs(ket) ** 2 + abs(bra) ** 2))


def _check_contraction(u_abs):
    if np.any(np.asarray(u_abs) > 1.0 + CONTRACTION_TOL) or np.any(np.asarray(u_abs) < 0):
        raise ParameterError(f"|u| must lie in [0, 1 + {CONTRACTION_TOL:g}]")


def propagate_dyad(beta, gamma, u):
    """||b><<g|| -> exp((1 - |u|^2) conj(g) b) ||u b><<u g||."""
    _check_contraction(abs(u))
    loss = 1.0 - abs(u) ** 2
    overlap = np.conj(gamma) * beta
    scale = complex(np.exp(loss * overlap))
    normalized = complex(np.exp(loss * (overlap - 0.5 * abs(beta) ** 2 - 0.5 * abs(gamma) ** 2)))
    return DyadImage(scale=scale, beta_out=complex(u * beta), gamma_out=complex(u * gamma),
                     normalized_weight=normalized)


def purity(cat, u_abs):
    """Tr rho(t)^2 of the evolved cat, with |beta|^2 = |beta0|^2 * u_abs^2.

    Closed form (2/N^2)[e^{2a} + e^{-2a} + e^{2a-4b} + e^{-2a+4b} + 4], evaluated
    after dividing through by e^{2a} so large amplitudes do not overflow.
    Accepts a scalar or an array of |u| values.
    """
    u_abs = np.asarray(u_abs, dtype=float)
    _check_contraction(u_abs)
    a = abs(cat.beta0) ** 2
    b = a * np.minimum(u_abs, 1.0) ** 2
    numerator = 1.0 + np.exp(-4.0 * a) + np.exp(-4.0 * b) + np.exp(-4.0 * (a - b)) + 4.0 * np.exp(-2.0 * a)
    value = 2.0 * numerator / (4.0 * (1.0 + np.exp(-2.0 * a)) ** 2)
    if value.ndim == 0:
        return float(value)
    return value


def evolve_cat(cat, u):
    """Evolved density operator coefficients for beta = beta0 * u(t)."""
    u = complex(u)
    _check_contraction(abs(u))
    beta = cat.beta0 * u
    a = abs(cat.beta0) ** 2
    b = abs(beta) ** 2
    n = cat.norm_N
    return EvolvedCat(
        beta0=cat.beta0,
        u_t=u,
        beta=beta,
        diag_weight=float(np.exp(a - b) / n),
        cross_weight=float(np.exp(-(a - b)) / n),
        purity=purity(cat, abs(u)),
    )


def mean_photon_number(evolved):
    """Tr(a^dag a rho) = |beta|^2 * tanh(|beta0|^2)."""
    return float(abs(evolved.beta) ** 2 * np.tanh(abs(evolved.beta0) ** 2))


def coherent_state_vector(beta, n_max=DEFAULT_N_MAX):
    """Fock amplitudes <k|beta>, k = 0..n_max, of a normalized coherent state.

    Raises:
        OracleError: the weight dropped above n_max is not below 1e-12.
    """
    beta = complex(beta)
    mean = abs(beta) ** 2
    tail = float(special.gammainc(n_max + 1, mean)) if mean > 0 else 0.0
    if tail >= FOCK_TAIL_TOL:
        raise OracleError(f"truncation at n_max={n_max} drops weight {tail:.3g} of |{beta}>")
    amplitudes = np.empty(n_max + 1, dtype=complex)
    amplitudes[0] = np.exp(-0.5 * mean)
    for k in range(1, n_max + 1):
        amplitudes[k] = amplitudes[k - 1] * beta / np.sqrt(k)
    return amplitudes


def cat_density_matrix(evolved, n_max=DEFAULT_N_MAX):
    """Truncated Fock-basis matrix of the evolved cat, built from normalized dyads."""
    plus = coherent_state_vector(evolved.beta, n_max)
    minus = coherent_state_vector(-evolved.beta, n_max)
    diag = evolved.normalized_diag_weight
    cross = evolved.normalized_cross_weight
    rho = diag * (np.outer(plus, plus.conj()) + np.outer(minus, minus.conj()))
    rho += cross * (np.outer(plus, minus.conj()) + np.outer(minus, plus.conj()))
    return rho


def fock_purity(rho):
    return float(np.real(np.trace(rho @ rho)))


class CatStateModel:
    """Schrodinger-cat initial state and its evolution under the reduced dynamics."""
    def __init__(self, config):
        """
        Args:
            config (dict): 'beta0' (complex amplitude) and optionally 'n_max'
                           for Fock-basis reconstructions.
        """
        self.cat = CatState(beta0=config.get('beta0', 1.0))
        self.n_max = int(config.get('n_max', DEFAULT_N_MAX))
        logger.info("CatStateModel initialized: beta0=%s, N=%.6g", self.cat.beta0, self.cat.norm_N)

    def evolve(self, u):
        return evolve_cat(self.cat, u)

    def purity_series(self, series):
        return purity(self.cat, np.minimum(series.abs_u, 1.0 + CONTRACTION_TOL))

    def density_matrix(self, u):
        return cat_density_matrix(self.evolve(u), self.n_max)
