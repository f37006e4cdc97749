import pytest

from models.discrete_bath import DiscreteBath
from models.spectral_kernel import Kernel, SpectralParams
from models.volterra_solver import TimeGrid, solve_u


@pytest.fixture
def weak_params():
    """Weak coupling, short memory: eta=0.1, omega_c=50."""
    return SpectralParams(eta=0.1, omega_c=50.0)


@pytest.fixture
def strong_params():
    """Strong coupling with the cutoff at resonance: eta=5, omega_c=1."""
    return SpectralParams(eta=5.0, omega_c=1.0)


@pytest.fixture
def rabi_kernel():
    """One resonant mode with |g|^2 = 1: u(t) = exp(-it)cos(t)."""
    return DiscreteBath.single_mode(1.0, 1.0).kernel()


@pytest.fixture
def rabi_series(rabi_kernel):
    return solve_u(rabi_kernel, TimeGrid(t_max=6.0, dt=1e-3))


@pytest.fixture
def strong_series(strong_params):
    return solve_u(Kernel.closed_form(strong_params), TimeGrid(t_max=5.0, dt=1e-3))
