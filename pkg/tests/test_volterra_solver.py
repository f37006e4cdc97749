import numpy as np
import pytest

from models.errors import ParameterError, SolverStabilityError
from models.spectral_kernel import Kernel, SpectralParams, markovian_coefficients
from models.volterra_solver import (
    AmplitudeSolverModel,
    TimeGrid,
    convergence_study,
    default_dt,
    markovian_u,
    solve_u,
)


def test_grid_points_are_multiples_of_dt():
    grid = TimeGrid(t_max=1.0, dt=0.1)
    assert grid.count == 11
    np.testing.assert_array_equal(grid.times, np.arange(11) * 0.1)
    fine = grid.refined(2)
    assert fine.count == 21
    np.testing.assert_allclose(fine.times[::2], grid.times, rtol=0, atol=1e-15)


@pytest.mark.parametrize("t_max, dt", [(1.0, 0.0), (1.0, -1e-3), (1e-4, 1e-3)])
def test_invalid_grid_rejected(t_max, dt):
    with pytest.raises(ParameterError):
        TimeGrid(t_max=t_max, dt=dt)


def test_free_evolution():
    params = SpectralParams(eta=0.0, omega_c=1.0)
    grid = TimeGrid(t_max=10.0, dt=1e-3)
    series = solve_u(Kernel.closed_form(params), grid)
    assert np.max(np.abs(series.u * np.exp(1j * grid.times) - 1.0)) < 1e-10


def test_vacuum_rabi_oscillation(rabi_series):
    times = rabi_series.times
    assert np.max(np.abs(rabi_series.u - np.exp(-1j * times) * np.cos(times))) < 1e-6


def test_boundary_values_exact(strong_series):
    assert strong_series.u[0] == 1.0
    assert strong_series.u_dot[0] == -1j


def test_series_is_read_only(strong_series):
    with pytest.raises(ValueError):
        strong_series.u[1] = 0.0


def test_contraction_strong_coupling(strong_series):
    assert np.max(strong_series.abs_u) <= 1.0 + 1e-8


def test_contraction_long_memory():
    params = SpectralParams(eta=5.0, omega_c=0.2)
    series = solve_u(Kernel.closed_form(params), TimeGrid(t_max=20.0, dt=default_dt(params)))
    assert np.max(series.abs_u) <= 1.0 + 1e-8


@pytest.mark.parametrize("params", [
    SpectralParams(eta=5.0, omega_c=1.0),
    SpectralParams(eta=0.5, omega_c=2.0, n=2.0),
])
def test_quadrature_kernel_agrees_with_closed_form(params):
    grid = TimeGrid(t_max=10.0, dt=1e-3)
    closed = solve_u(Kernel.closed_form(params), grid)
    quad = solve_u(Kernel.quadrature(params), grid)
    assert np.max(np.abs(closed.u - quad.u)) < 1e-7


def test_short_time_decay_rate_grows_linearly(weak_params):
    # Gamma(t) ~ mu(0)*t = 250*t while t << 1/omega_c.
    grid = TimeGrid(t_max=1e-3, dt=1e-5)
    series = solve_u(Kernel.closed_form(weak_params), grid)
    ratio = series.u_dot[1:] / series.u[1:]
    gamma = -ratio.real
    np.testing.assert_allclose(gamma, 250.0 * grid.times[1:], rtol=1e-2)


def test_convergence_order_against_exact(rabi_kernel):
    report = convergence_study(rabi_kernel, TimeGrid(t_max=6.0, dt=4e-3), levels=4,
                               exact=lambda t: np.exp(-1j * t) * np.cos(t))
    assert report.against_exact
    assert report.dts == pytest.approx((4e-3, 2e-3, 1e-3, 5e-4))
    assert 1.7 <= report.observed_order <= 2.3
    assert all(3.2 < factor < 4.8 for factor in report.reduction_factors)


def test_convergence_order_from_self_refinement(strong_params):
    report = convergence_study(Kernel.closed_form(strong_params), TimeGrid(t_max=4.0, dt=8e-3), levels=4)
    assert not report.against_exact
    assert len(report.differences) == 3
    assert len(report.orders) == 2
    assert 1.7 <= report.observed_order <= 2.3
    assert report.errors[-1] == 0.0


def test_weak_coupling_error_shrinks_fourfold(weak_params):
    report = convergence_study(Kernel.closed_form(weak_params), TimeGrid(t_max=2.0, dt=1e-3), levels=3)
    assert report.dts == pytest.approx((1e-3, 5e-4, 2.5e-4))
    assert 3.3 <= report.reduction_factors[0] <= 4.8


@pytest.mark.parametrize("levels", [1, 7])
def test_convergence_levels_bounded(rabi_kernel, levels):
    with pytest.raises(ParameterError):
        convergence_study(rabi_kernel, TimeGrid(t_max=1.0, dt=1e-2), levels=levels)


def test_markovian_amplitude(weak_params):
    grid = TimeGrid(t_max=5.0, dt=1e-2)
    coefficients = markovian_coefficients(weak_params)
    series = markovian_u(weak_params, grid, coefficients)
    np.testing.assert_allclose(series.abs_u, np.exp(-coefficients.gamma_M * grid.times), rtol=1e-12)
    np.testing.assert_allclose(series.u_dot / series.u, -(coefficients.gamma_M + 1j * coefficients.omega_M),
                               rtol=1e-12)


def test_default_dt(weak_params, strong_params):
    assert default_dt(weak_params) == pytest.approx(1e-3)
    assert default_dt(SpectralParams(eta=5.0, omega_c=50.0)) == pytest.approx(0.05 / np.sqrt(12500.0))
    assert default_dt(strong_params) == pytest.approx(1e-3)


def test_stability_error_reports_step_and_advice():
    error = SolverStabilityError(step=12, time=0.12, abs_u=1.01, dt=0.01)
    assert error.step == 12
    assert "step 12" in str(error)
    assert "0.0025" in str(error)


def test_model_uses_configured_grid():
    model = AmplitudeSolverModel({'t_max': 2.0, 'dt': 0.01})
    series = model.solve(Kernel.closed_form(SpectralParams(eta=0.0, omega_c=1.0)))
    assert series.grid.count == 201
    assert series.times[-1] == pytest.approx(2.0)
