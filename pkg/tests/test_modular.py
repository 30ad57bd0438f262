import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lindrate.lindblad import LindbladModel, Picture, propagate_exact
from lindrate.modular import (
    ModularConfig, build_pseudo_hamiltonian, evolve_modular, heisenberg_step, heisenberg_step_dense,
    schrodinger_step, schrodinger_step_dense,
)
from lindrate.models import SpinHalfParams, spin_half_model
from conftest import random_density, random_hermitian, random_matrix


def random_model(rng, d, k=2):
    return LindbladModel(random_hermitian(rng, d), tuple(0.4 * random_matrix(rng, d) for _ in range(k)), 1.3)


def test_pseudo_hamiltonian_structure(rng):
    m = random_model(rng, 3, 2)
    j = build_pseudo_hamiltonian(m)
    assert j.shape == (9, 9)
    np.testing.assert_allclose(j, j.conj().T)
    np.testing.assert_allclose(j[:3, 3:6], m.lindblads[0].conj().T)
    np.testing.assert_allclose(j[6:9, :3], m.lindblads[1])
    np.testing.assert_array_equal(j[3:, 3:], 0)
    np.testing.assert_array_equal(j[:3, :3], 0)


def test_pseudo_hamiltonian_needs_jump_operator():
    with pytest.raises(ValueError):
        build_pseudo_hamiltonian(LindbladModel(np.eye(2), (), 1.0))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.floats(1e-3, 0.5), st.integers(0, 2**31 - 1))
def test_block_steps_match_dense_reference(d, k, delta, seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, d, k)
    rho, theta = random_density(rng, d), random_hermitian(rng, d)
    np.testing.assert_allclose(schrodinger_step(m, rho, delta), schrodinger_step_dense(m, rho, delta), atol=1e-12)
    out, p = heisenberg_step(m, theta + 3 * np.eye(d), delta)
    ref, p_ref = heisenberg_step_dense(m, theta + 3 * np.eye(d), delta)
    np.testing.assert_allclose(out, ref, atol=1e-12)
    assert abs(p - p_ref) < 1e-12


def test_schrodinger_step_is_a_channel(rng):
    m = random_model(rng, 3)
    out = schrodinger_step(m, random_density(rng, 3), 0.3)
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.linalg.eigvalsh((out + out.conj().T) / 2).min() > -1e-12


def test_heisenberg_step_is_unital_with_probability_near_one_over_n(rng):
    m = random_model(rng, 3, 2)
    out, p = heisenberg_step(m, np.eye(3), 1e-3)
    np.testing.assert_allclose(out, np.eye(3), atol=1e-12)
    assert abs(p - 1 / 3) < 1e-2


def test_heisenberg_step_traceless_input_probability(rng):
    m = random_model(rng, 2, 1)
    _, p = heisenberg_step(m, np.diag([1.0, -1.0]), 1e-3)
    assert 0.4 < p <= 0.5 + 1e-12


@pytest.mark.parametrize("picture", list(Picture))
def test_local_error_is_second_order(rng, picture):
    m = random_model(rng, 2, 1)
    a = random_density(rng, 2)
    errs = []
    for delta in (1e-2, 5e-3):
        if picture is Picture.SCHRODINGER:
            one = schrodinger_step(m, a, delta)
        else:
            one, _ = heisenberg_step(m, a, delta)
        errs.append(np.abs(one - propagate_exact(m, a, delta, picture)).max())
    assert 3.5 < errs[0] / errs[1] < 4.5


@pytest.mark.parametrize("picture", list(Picture))
def test_global_error_first_order(picture):
    model, setup = spin_half_model(SpinHalfParams())
    a = setup.theta_B if picture is Picture.HEISENBERG else setup.rho_eq @ setup.theta_A
    exact = propagate_exact(model, a, 1.0, picture)
    errs = [np.abs(evolve_modular(model, a, ModularConfig(n, 1.0, picture)).operator - exact).max() for n in (50, 100, 200)]
    assert errs[0] > errs[1] > errs[2]
    slope = np.polyfit(np.log([50, 100, 200]), np.log(errs), 1)[0]
    assert abs(slope + 1) < 0.15


def test_success_probability_decays_geometrically():
    model, setup = spin_half_model(SpinHalfParams())
    res = evolve_modular(model, setup.theta_B, ModularConfig(10, 1.0))
    assert 0.3 * 0.5**10 < res.success_probability < 3 * 0.5**10


def test_zero_time_returns_copy(rng):
    m = random_model(rng, 2)
    a = random_matrix(rng, 2)
    res = evolve_modular(m, a, ModularConfig(5, 0.0))
    np.testing.assert_array_equal(res.operator, a)
    assert res.operator is not a and res.success_probability == 1.0


def test_config_validation():
    with pytest.raises(ValueError):
        ModularConfig(0, 1.0)
    with pytest.raises(ValueError):
        ModularConfig(3, -1.0)
    assert ModularConfig(4, 2.0, "schrodinger").delta == 0.5


def test_log_success_probability_survives_underflow():
    model, setup = spin_half_model(SpinHalfParams())
    res = evolve_modular(model, setup.theta_B, ModularConfig(2000, 1.0))
    assert res.success_probability == 0.0
    assert res.log_success_probability == pytest.approx(2000 * np.log(0.5), rel=1e-3)
