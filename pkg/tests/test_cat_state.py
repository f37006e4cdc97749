import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from models.cat_state import (
    CatState,
    CatStateModel,
    cat_density_matrix,
    coherent_state_vector,
    evolve_cat,
    fock_purity,
    mean_photon_number,
    propagate_dyad,
    purity,
)
from models.errors import OracleError, ParameterError

amplitudes = st.builds(
    complex,
    st.floats(min_value=-1.0, max_value=1.0),
    st.floats(min_value=-1.0, max_value=1.0),
)
fractions = st.floats(min_value=0.0, max_value=1.0)


def test_normalization_constant():
    assert CatState(1.0).norm_N == pytest.approx(2.0 * (np.e + 1.0 / np.e))


def test_purity_at_endpoints_is_one():
    cat = CatState(1.0)
    assert abs(purity(cat, 1.0) - 1.0) < 1e-12
    assert abs(purity(cat, 0.0) - 1.0) < 1e-12


def test_purity_minimum_at_half_population():
    assert purity(CatState(1.0), np.sqrt(0.5)) == pytest.approx(0.7100, abs=1e-4)


@given(amplitudes, fractions)
def test_purity_symmetric_in_population(beta0, s):
    cat = CatState(beta0)
    assert purity(cat, np.sqrt(s)) == pytest.approx(purity(cat, np.sqrt(1.0 - s)), abs=1e-12)


@given(amplitudes, fractions)
def test_purity_bounded(beta0, s):
    value = purity(CatState(beta0), np.sqrt(s))
    assert 0.0 < value <= 1.0 + 1e-12


def test_purity_accepts_arrays():
    values = purity(CatState(1.0), np.array([1.0, np.sqrt(0.5), 0.0]))
    assert values.shape == (3,)
    assert values[1] < values[0]


def test_purity_large_amplitude_does_not_overflow():
    assert np.isfinite(purity(CatState(30.0), 0.5))


def test_amplitude_outside_unit_disc_rejected():
    with pytest.raises(ParameterError):
        purity(CatState(1.0), 1.0 + 1e-6)
    with pytest.raises(ParameterError):
        evolve_cat(CatState(1.0), 1.1)


def test_dyad_identity_and_vacuum_limits():
    image = propagate_dyad(0.7 + 0.2j, -0.3j, 1.0)
    assert image.scale == 1.0
    assert image.beta_out == 0.7 + 0.2j
    assert image.gamma_out == -0.3j
    diagonal = propagate_dyad(0.8, 0.8, 0.0)
    assert diagonal.beta_out == 0.0
    assert diagonal.normalized_weight == pytest.approx(1.0)
    assert diagonal.scale == pytest.approx(np.exp(0.64))


def test_evolved_weights():
    evolved = evolve_cat(CatState(1.0), np.sqrt(0.5) * np.exp(-0.3j))
    a, b = 1.0, 0.5
    n = CatState(1.0).norm_N
    assert evolved.diag_weight == pytest.approx(np.exp(a - b) / n)
    assert evolved.cross_weight == pytest.approx(np.exp(-(a - b)) / n)
    assert evolved.normalized_diag_weight == pytest.approx(np.exp(a) / n)
    assert evolved.normalized_cross_weight == pytest.approx(np.exp(-a + 2 * b) / n)
    assert abs(evolved.beta) ** 2 == pytest.approx(b)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(min_value=0.0, max_value=1.5),
    st.floats(min_value=0.0, max_value=2 * np.pi),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=2 * np.pi),
)
def test_closed_form_matches_fock_purity(radius, angle, u_abs, phase):
    cat = CatState(radius * np.exp(1j * angle))
    evolved = evolve_cat(cat, u_abs * np.exp(1j * phase))
    rho = cat_density_matrix(evolved, n_max=24)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
    assert fock_purity(rho) == pytest.approx(evolved.purity, abs=1e-8)


def test_mean_photon_number_matches_fock_matrix():
    evolved = evolve_cat(CatState(1.2), 0.6 + 0.3j)
    rho = cat_density_matrix(evolved, n_max=24)
    fock = float(np.dot(np.arange(25), np.diag(rho).real))
    assert mean_photon_number(evolved) == pytest.approx(fock, abs=1e-10)
    assert mean_photon_number(evolved) == pytest.approx(0.45 * 1.44 * np.tanh(1.44))


def test_coherent_state_vector_is_normalized():
    vector = coherent_state_vector(0.9 - 0.4j, n_max=24)
    assert np.vdot(vector, vector).real == pytest.approx(1.0, abs=1e-12)


def test_truncation_too_small_raises():
    with pytest.raises(OracleError):
        coherent_state_vector(5.0, n_max=10)


def test_model_purity_series(strong_series):
    model = CatStateModel({'beta0': 1.0})
    values = model.purity_series(strong_series)
    assert values.shape == strong_series.u.shape
    assert values[0] == pytest.approx(1.0, abs=1e-12)
    assert model.density_matrix(1.0).shape == (25, 25)
