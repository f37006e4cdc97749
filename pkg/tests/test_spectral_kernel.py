import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from models.errors import ParameterError, QuadratureToleranceWarning
from models.spectral_kernel import (
    Kernel,
    KernelMode,
    QuadratureConfig,
    SpectralKernelModel,
    SpectralParams,
    bound_state,
    kernel_closed_form,
    kernel_discrete_sum,
    kernel_quadrature,
    markovian_coefficients,
    pv_integral,
    pv_integral_cauchy_weight,
    pv_integral_ohmic_exact,
    spectral_density,
)

params_strategy = st.builds(
    SpectralParams,
    eta=st.floats(min_value=0.0, max_value=5.0),
    omega_c=st.floats(min_value=0.2, max_value=50.0),
    n=st.sampled_from([0.5, 1.0, 2.0]),
)


def test_spectral_density_at_resonance(weak_params):
    assert spectral_density(weak_params, 1.0) == pytest.approx(0.1 * np.exp(-0.02), rel=1e-12)
    assert spectral_density(weak_params, 0.0) == 0.0


def test_spectral_density_rejects_negative_frequency(weak_params):
    with pytest.raises(ParameterError):
        spectral_density(weak_params, -0.5)


@given(params_strategy, st.floats(min_value=0.0, max_value=1e3))
def test_spectral_density_is_non_negative(params, omega):
    assert spectral_density(params, omega) >= 0.0


@pytest.mark.parametrize("kwargs", [
    {'eta': -0.1, 'omega_c': 1.0},
    {'eta': 0.1, 'omega_c': 0.0},
    {'eta': 0.1, 'omega_c': 1.0, 'n': 0.0},
    {'eta': 0.1, 'omega_c': 1.0, 'omega_0': -1.0},
])
def test_invalid_params_rejected(kwargs):
    with pytest.raises(ParameterError):
        SpectralParams(**kwargs)


def test_classification_and_time_scales():
    assert SpectralParams(eta=1.0, omega_c=2.0, n=0.5).classification == 'sub-ohmic'
    assert SpectralParams(eta=1.0, omega_c=2.0, n=1.0).classification == 'ohmic'
    assert SpectralParams(eta=1.0, omega_c=2.0, n=2.0).classification == 'super-ohmic'
    params = SpectralParams(eta=1.0, omega_c=4.0)
    assert params.tau_E == 0.25
    assert params.tau_0 == 1.0


def test_closed_form_at_zero_is_total_weight(weak_params):
    assert kernel_closed_form(weak_params, 0.0) == pytest.approx(250.0, rel=1e-14)
    assert Kernel.closed_form(weak_params).at_zero == pytest.approx(250.0, rel=1e-14)


@given(params_strategy, st.floats(min_value=0.0, max_value=20.0))
def test_kernel_conjugate_symmetry(params, x):
    forward = kernel_closed_form(params, x)
    backward = kernel_closed_form(params, -x)
    assert backward == pytest.approx(np.conj(forward), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("omega_c", [1.0, 50.0])
@pytest.mark.parametrize("n", [0.5, 1.0, 2.0, 3.0])
def test_quadrature_matches_closed_form(n, omega_c):
    params = SpectralParams(eta=0.1, omega_c=omega_c, n=n)
    x = np.concatenate(([0.0], np.geomspace(1e-4, 100.0, 81)))
    quad = kernel_quadrature(params, x, QuadratureConfig(nodes=400))
    exact = kernel_closed_form(params, x)
    assert np.max(np.abs(quad - exact) / np.abs(exact)) < 1e-8


def test_quadrature_is_conjugate_symmetric():
    params = SpectralParams(eta=0.5, omega_c=2.0, n=0.5)
    x = np.linspace(0.1, 20.0, 9)
    np.testing.assert_allclose(kernel_quadrature(params, -x), np.conj(kernel_quadrature(params, x)),
                               rtol=1e-14, atol=0)


def test_quadrature_below_floor_warns(weak_params):
    cfg = QuadratureConfig(nodes=50)
    kernel = Kernel.quadrature(weak_params, cfg)
    assert not kernel.tolerance_met
    with pytest.warns(QuadratureToleranceWarning):
        kernel.evaluate(np.array([0.0, 0.1]))


def test_discrete_sum_single_mode():
    x = np.linspace(0.0, 3.0, 7)
    values = kernel_discrete_sum([1.5], [0.25], x)
    np.testing.assert_allclose(values, 0.25 * np.exp(-1.5j * x), rtol=1e-14)


def test_discrete_kernel_validates_weights():
    with pytest.raises(ParameterError):
        Kernel.discrete_sum([1.0, 2.0], [0.1, -0.1])
    kernel = Kernel.discrete_sum([1.0, 2.0], [0.1, 0.3])
    assert kernel.mode is KernelMode.DISCRETE_SUM
    assert kernel.modes_list == [(1.0, 0.1), (2.0, 0.3)]
    assert kernel.at_zero == pytest.approx(0.4)


def test_kernel_mode_accepts_strings(weak_params):
    kernel = Kernel(params=weak_params, mode='closed_form')
    assert kernel.mode is KernelMode.CLOSED_FORM


def test_pv_shift_weak_coupling(weak_params):
    shift = pv_integral(weak_params)
    assert shift == pytest.approx(5.3249, abs=1e-4)
    assert shift == pytest.approx(pv_integral_ohmic_exact(weak_params), rel=1e-6)


@pytest.mark.parametrize("params", [
    SpectralParams(eta=5.0, omega_c=1.0),
    SpectralParams(eta=5.0, omega_c=0.2),
    SpectralParams(eta=0.3, omega_c=3.0, n=2.0),
])
def test_pv_shift_matches_cauchy_weight_rule(params):
    assert pv_integral(params) == pytest.approx(pv_integral_cauchy_weight(params), rel=1e-6)


def test_pv_exact_formula_needs_ohmic_bath():
    with pytest.raises(ParameterError):
        pv_integral_ohmic_exact(SpectralParams(eta=1.0, omega_c=1.0, n=2.0))


def test_markovian_coefficients(weak_params):
    coefficients = markovian_coefficients(weak_params)
    assert coefficients.gamma_M == pytest.approx(0.307938, abs=1e-6)
    assert coefficients.omega_M == pytest.approx(1.0 - coefficients.delta_omega, rel=1e-15)


def test_uncoupled_bath_has_no_shift_or_bound_state():
    params = SpectralParams(eta=0.0, omega_c=1.0)
    assert pv_integral(params) == 0.0
    assert not bound_state(params).exists


def test_bound_state_below_threshold():
    # eta*omega_c*Gamma(n) = 0.5 < omega_0: no state splits off the continuum.
    assert not bound_state(SpectralParams(eta=0.01, omega_c=50.0)).exists


@pytest.mark.parametrize("params", [
    SpectralParams(eta=0.1, omega_c=50.0),
    SpectralParams(eta=5.0, omega_c=1.0),
])
def test_bound_state_above_threshold(params):
    state = bound_state(params)
    assert state.exists
    assert state.frequency < 0
    assert 0 < state.residue < 1
    assert state.steady_abs_u == state.residue


def test_model_builds_configured_kernel():
    model = SpectralKernelModel({'eta': 0.5, 'omega_c': 2.0, 'kernel_mode': 'quadrature', 'quad_nodes': 320})
    kernel = model.kernel()
    assert kernel.mode is KernelMode.QUADRATURE
    assert kernel.quad_cfg.nodes == 320
    assert model.markovian_coefficients() is model.markovian_coefficients()


def test_model_rejects_discrete_sum_mode():
    with pytest.raises(ParameterError):
        SpectralKernelModel({'eta': 0.5, 'omega_c': 2.0, 'kernel_mode': 'discrete_sum'})


@settings(max_examples=25, deadline=None)
@given(params_strategy)
def test_quadrature_moment_identity(params):
    value = complex(kernel_quadrature(params, 0.0))
    assert abs(value - params.total_weight) <= 1e-8 * max(params.total_weight, 1e-300)


@pytest.mark.parametrize("params", [
    SpectralParams(eta=0.1, omega_c=50.0),
    SpectralParams(eta=5.0, omega_c=1.0),
    SpectralParams(eta=0.3, omega_c=3.0, n=2.0),
    SpectralParams(eta=5.0, omega_c=0.2),
])
def test_decay_rate_is_linear_in_coupling(params):
    doubled = SpectralParams(eta=2.0 * params.eta, omega_c=params.omega_c, n=params.n)
    assert markovian_coefficients(doubled).gamma_M == 2.0 * markovian_coefficients(params).gamma_M
