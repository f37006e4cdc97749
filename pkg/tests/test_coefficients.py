import numpy as np
import pytest

from models.coefficients import (
    CoefficientSeries,
    MasterEquationCoefficientsModel,
    extract_rates,
    rate_statistics,
    valid_prefix,
)
from models.errors import ParameterError
from models.spectral_kernel import Kernel
from models.volterra_solver import TimeGrid, solve_u


def test_initial_rates(strong_series):
    coeffs = extract_rates(strong_series)
    assert coeffs.valid[0]
    assert coeffs.gamma[0] == 0.0
    assert not np.signbit(coeffs.gamma[0])
    assert coeffs.omega[0] == pytest.approx(1.0, abs=1e-10)


def test_rabi_decay_rate_is_tangent(rabi_series):
    coeffs = extract_rates(rabi_series)
    window = rabi_series.times <= 1.4
    np.testing.assert_allclose(coeffs.gamma[window], np.tan(rabi_series.times[window]), rtol=0, atol=1e-4)


def test_invalid_points_sit_at_amplitude_zero(rabi_series):
    coeffs = extract_rates(rabi_series, epsilon_u=1e-3)
    invalid_times = rabi_series.times[~coeffs.valid]
    assert invalid_times.size > 0
    zeros = np.array([np.pi / 2, 3 * np.pi / 2])
    assert np.all(np.min(np.abs(invalid_times[:, None] - zeros), axis=1) < 2e-3)
    assert np.all(np.isnan(coeffs.gamma[~coeffs.valid]))
    assert valid_prefix(coeffs) == int(np.flatnonzero(~coeffs.valid)[0])


def test_shift_is_complement_of_frequency(strong_series):
    coeffs = extract_rates(strong_series, omega_0=1.0)
    np.testing.assert_array_equal(coeffs.delta_omega[coeffs.valid], 1.0 - coeffs.omega[coeffs.valid])


def test_decay_rate_matches_population_loss(strong_series):
    # d|u|^2/dt = -2*Gamma*|u|^2, checked with central differences.
    coeffs = extract_rates(strong_series)
    population = strong_series.abs_u ** 2
    dt = strong_series.grid.dt
    derivative = (population[2:] - population[:-2]) / (2 * dt)
    expected = -2.0 * coeffs.gamma[1:-1] * population[1:-1]
    np.testing.assert_allclose(derivative, expected, rtol=0, atol=1e-4)


def test_strong_coupling_rate_turns_negative(strong_params):
    series = solve_u(Kernel.closed_form(strong_params), TimeGrid(t_max=10.0, dt=1e-3))
    coeffs = extract_rates(series)
    assert np.nanmin(coeffs.gamma) < 0


def test_rate_statistics_counts_sign_changes():
    grid = TimeGrid(t_max=0.5, dt=0.1)
    gamma = [0.0, 1.0, -1.0, 2.0, 0.0, -3.0]
    coeffs = CoefficientSeries(grid=grid, gamma=gamma, omega=np.ones(6), delta_omega=np.zeros(6),
                               valid=np.ones(6, dtype=bool))
    stats = rate_statistics(coeffs, 0.0, 0.5)
    assert stats.sign_changes == 3
    assert stats.mean_gamma == pytest.approx(-1.0 / 6.0)
    assert stats.mean_abs_gamma == pytest.approx(7.0 / 6.0)
    assert stats.valid_fraction == 1.0


def test_rate_statistics_skips_invalid_points():
    grid = TimeGrid(t_max=0.3, dt=0.1)
    coeffs = CoefficientSeries(grid=grid, gamma=[0.0, 1.0, np.nan, 3.0], omega=np.ones(4),
                               delta_omega=np.zeros(4), valid=[True, True, False, True])
    stats = rate_statistics(coeffs, 0.0, 0.3)
    assert stats.mean_gamma == pytest.approx(4.0 / 3.0)
    assert stats.valid_fraction == pytest.approx(0.75)
    assert valid_prefix(coeffs) == 2


def test_rate_statistics_needs_valid_points():
    grid = TimeGrid(t_max=0.1, dt=0.1)
    coeffs = CoefficientSeries(grid=grid, gamma=[np.nan, np.nan], omega=[np.nan, np.nan],
                               delta_omega=[np.nan, np.nan], valid=[False, False])
    with pytest.raises(ParameterError):
        rate_statistics(coeffs, 0.0, 0.1)


def test_epsilon_must_be_positive(strong_series):
    with pytest.raises(ParameterError):
        extract_rates(strong_series, epsilon_u=0.0)


def test_model_reads_epsilon(strong_series):
    model = MasterEquationCoefficientsModel({'epsilon_u': 2.0})
    coeffs = model.extract(strong_series)
    assert not coeffs.valid.any()
    assert valid_prefix(coeffs) == 0
