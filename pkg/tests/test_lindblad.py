import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lindrate.lindblad import (
    DivergenceError, LindbladModel, Picture, apply_adjoint_generator, apply_generator, liouvillian,
    propagate_exact, propagate_rk4, unvec, vec,
)
from lindrate.operators import SIGMA_Y, SIGMA_Z
from conftest import random_density, random_hermitian, random_matrix


def random_model(rng, d, k=2, hbar=0.7):
    return LindbladModel(random_hermitian(rng, d), tuple(0.5 * random_matrix(rng, d) for _ in range(k)), hbar)


def test_generator_is_traceless_and_hermiticity_preserving(rng):
    m = random_model(rng, 3)
    out = apply_generator(m, random_density(rng, 3))
    assert abs(np.trace(out)) < 1e-12
    np.testing.assert_allclose(out, out.conj().T, atol=1e-12)


def test_adjoint_generator_is_unital(rng):
    m = random_model(rng, 4)
    np.testing.assert_allclose(apply_adjoint_generator(m, np.eye(4)), 0, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(0, 3), st.integers(0, 2**31 - 1))
def test_generators_are_adjoint(d, k, seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, d, k)
    rho, theta = random_matrix(rng, d), random_matrix(rng, d)
    lhs = np.trace(theta @ apply_generator(m, rho))
    rhs = np.trace(apply_adjoint_generator(m, theta) @ rho)
    assert abs(lhs - rhs) < 1e-10 * max(1, abs(lhs))


@pytest.mark.parametrize("picture", list(Picture))
def test_superoperator_matches_direct_application(rng, picture):
    m = random_model(rng, 3)
    a = random_matrix(rng, 3)
    direct = apply_generator(m, a) if picture is Picture.SCHRODINGER else apply_adjoint_generator(m, a)
    np.testing.assert_allclose(unvec(liouvillian(m, picture) @ vec(a), 3), direct, atol=1e-12)


def test_exact_propagation_duality(rng):
    m = random_model(rng, 3)
    rho, theta, t = random_density(rng, 3), random_hermitian(rng, 3), 0.8
    lhs = np.trace(theta @ propagate_exact(m, rho, t, Picture.SCHRODINGER))
    rhs = np.trace(propagate_exact(m, theta, t, Picture.HEISENBERG) @ rho)
    assert abs(lhs - rhs) < 1e-12


def test_exact_propagation_trace_and_positivity(rng):
    m = random_model(rng, 3)
    out = propagate_exact(m, random_density(rng, 3), 2.0, Picture.SCHRODINGER)
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.linalg.eigvalsh((out + out.conj().T) / 2).min() > -1e-12


def test_exact_spin_half_pauli_coefficients():
    # dephased spin: theta_B(t) = I/2 + c_x sx + c_z sz with closed-form coefficients
    mu, gamma = 0.1, 1.0
    m = LindbladModel(mu * SIGMA_Y, (np.sqrt(gamma) * SIGMA_Z,), 1.0)
    t = 1.0
    w = np.sqrt(gamma**2 - 4 * mu**2)
    cx = np.exp(-gamma * t) * mu / w * np.sinh(w * t)
    cz = -0.5 * np.exp(-gamma * t) * (np.cosh(w * t) + gamma / w * np.sinh(w * t))
    b = propagate_exact(m, np.diag([0.0, 1.0]), t)
    np.testing.assert_allclose(b, 0.5 * np.eye(2) + cx * np.array([[0, 1], [1, 0]]) + cz * SIGMA_Z, atol=1e-13)


def test_exact_t_zero_is_identity(rng):
    m = random_model(rng, 2)
    a = random_matrix(rng, 2)
    np.testing.assert_array_equal(propagate_exact(m, a, 0.0), a)


def test_rk4_agrees_with_exact(rng):
    m = random_model(rng, 3)
    a = random_hermitian(rng, 3)
    exact = propagate_exact(m, a, 1.3, Picture.HEISENBERG)
    np.testing.assert_allclose(propagate_rk4(m, a, 1.3, 1e-3), exact, atol=1e-10)


def test_rk4_fourth_order(rng):
    m = random_model(rng, 2)
    a = random_density(rng, 2)
    exact = propagate_exact(m, a, 1.0, Picture.SCHRODINGER)
    e1 = np.abs(propagate_rk4(m, a, 1.0, 0.1, Picture.SCHRODINGER) - exact).max()
    e2 = np.abs(propagate_rk4(m, a, 1.0, 0.05, Picture.SCHRODINGER) - exact).max()
    assert 10 < e1 / e2 < 24


def test_rk4_shortened_last_step(rng):
    m = random_model(rng, 2)
    a = random_density(rng, 2)
    np.testing.assert_allclose(propagate_rk4(m, a, 0.955, 0.01), propagate_exact(m, a, 0.955), atol=1e-7)


def test_rk4_divergence_is_reported():
    m = LindbladModel(np.diag([0.0, 1e3]), (np.sqrt(1e3) * SIGMA_Z,), 1.0)
    with np.errstate(all="ignore"), pytest.raises(DivergenceError):
        propagate_rk4(m, np.array([[0, 1], [1, 0]]), 100.0, 1.0)


def test_model_validation():
    with pytest.raises(ValueError):
        LindbladModel(np.array([[0, 1], [0, 0]]), (), 1.0)
    with pytest.raises(ValueError):
        LindbladModel(np.eye(2), (np.eye(3),), 1.0)
    with pytest.raises(ValueError):
        LindbladModel(np.eye(2), (), 0.0)


def test_picture_parse():
    assert Picture.parse("Schrödinger") is Picture.SCHRODINGER
    assert Picture.parse("heisenberg") is Picture.HEISENBERG
