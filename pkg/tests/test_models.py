import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lindrate.lindblad import apply_generator, propagate_exact
from lindrate.models import (
    CLParams, SpinHalfParams, bare_hamiltonian, build_grid_1d, caldeira_leggett_model, cl_setup,
    double_well, double_well_potential, gibbs_state, lindblad_fixed_point, region_projector,
    spin_half_analytic, spin_half_model, spin_half_rate_peak_time,
)


def numeric_C(params, t):
    model, setup = spin_half_model(params)
    b = propagate_exact(model, setup.theta_B, t)
    a, rho = setup.theta_A, setup.rho_eq
    return np.trace(rho @ (a @ b + b @ a)).real / (2 * np.trace(rho @ a).real)


def test_analytic_values_at_t1():
    a = spin_half_analytic(SpinHalfParams(), 1.0)
    assert a.C == pytest.approx(0.00566053, abs=1e-8)
    assert a.Cdot == pytest.approx(0.00859262, abs=1e-8)
    assert a.metastable


@settings(max_examples=30, deadline=None)
@given(st.floats(0.02, 0.8), st.floats(0.1, 2.0), st.floats(0.5, 2.0), st.floats(0.0, 4.0))
def test_analytic_matches_exact_propagation(mu, gamma, hbar, t):
    # covers both the metastable and the trigonometric branch
    params = SpinHalfParams(mu, gamma, hbar)
    assert spin_half_analytic(params, t).C == pytest.approx(numeric_C(params, t), abs=1e-11)


def test_analytic_threshold_limit():
    p = SpinHalfParams(mu=0.5, gamma=1.0)
    near = SpinHalfParams(mu=0.5 - 1e-7, gamma=1.0)
    assert spin_half_analytic(p, 1.3).C == pytest.approx(spin_half_analytic(near, 1.3).C, abs=1e-6)
    assert not spin_half_analytic(SpinHalfParams(mu=0.8), 1.0).metastable


def test_analytic_rate_is_derivative():
    p, t, h = SpinHalfParams(), 1.4, 1e-5
    fd = (spin_half_analytic(p, t + h).C - spin_half_analytic(p, t - h).C) / (2 * h)
    assert spin_half_analytic(p, t).Cdot == pytest.approx(fd, rel=1e-8)


def test_rate_peak_time_is_maximum():
    p = SpinHalfParams()
    tp = spin_half_rate_peak_time(p)
    r = lambda t: spin_half_analytic(p, t).Cdot
    assert r(tp) > r(tp - 1e-2) and r(tp) > r(tp + 1e-2)


def test_spin_params_validation():
    with pytest.raises(ValueError):
        SpinHalfParams(mu=-1)


@pytest.mark.parametrize("n", [2, 4, 5])
def test_grid_construction(n):
    hbar = 0.01
    g = build_grid_1d(n, hbar)
    assert g.delta_x * g.delta_p == 2 * np.pi * hbar / 2**n
    np.testing.assert_allclose(g.fourier.conj().T @ g.fourier, np.eye(2**n), atol=1e-10)
    np.testing.assert_allclose(g.momentum_op, g.momentum_op.conj().T, atol=1e-14)
    # plane waves are momentum eigenvectors
    np.testing.assert_allclose(g.momentum_op @ g.fourier, g.fourier * g.momenta, atol=1e-12)
    assert g.points[0] == 0 and g.points[-1] == 1 - 2.0**-n
    assert g.momenta[0] == -(2 ** (n - 1)) * g.delta_p


def test_grid_rejects_bad_n():
    with pytest.raises(ValueError):
        build_grid_1d(1, 0.01)
    with pytest.raises(ValueError):
        build_grid_1d(8, 0.01)


def test_double_well_barrier():
    assert double_well(0.5) == pytest.approx(0.162, abs=1e-15)
    assert double_well(0.2) == 0 and double_well(0.8) == 0
    g = build_grid_1d(3, 0.01)
    np.testing.assert_allclose(np.diag(double_well_potential(g)).real, double_well(g.points))


def test_cl_model_operators():
    params = CLParams()
    g = build_grid_1d(4, params.hbar)
    v = double_well_potential(g)
    model = caldeira_leggett_model(g, params, v)
    assert params.thermal_length == pytest.approx(0.392837, abs=1e-6)
    x, p = g.position_op, g.momentum_op
    lam = params.thermal_length
    np.testing.assert_allclose(model.lindblads[0], np.sqrt(0.1) * (x / lam + 1j * lam * p))
    expected_h = p @ p / 2 + v + 0.05 * (x @ p + p @ x)
    np.testing.assert_allclose(model.hamiltonian, expected_h, atol=1e-12)
    assert caldeira_leggett_model(g, CLParams(gamma=0.0), v).lindblads == ()


def test_cl_model_hbar_mismatch():
    g = build_grid_1d(3, 0.02)
    with pytest.raises(ValueError):
        caldeira_leggett_model(g, CLParams(), double_well_potential(g))


def test_gibbs_state_is_thermal():
    params = CLParams()
    g = build_grid_1d(4, params.hbar)
    v = double_well_potential(g)
    rho = gibbs_state(g, v, params)
    h0 = bare_hamiltonian(g, params, v)
    assert abs(np.trace(rho) - 1) < 1e-12
    np.testing.assert_allclose(rho @ h0, h0 @ rho, atol=1e-10)
    w, vecs = np.linalg.eigh(h0)
    pops = np.real(np.diag(vecs.conj().T @ rho @ vecs))
    np.testing.assert_allclose(pops[1] / pops[0], np.exp(-(w[1] - w[0]) / params.kT), rtol=1e-8)


def test_region_projector_inclusive_bounds():
    g = build_grid_1d(3, 0.01)
    p = region_projector(g, 0.125, 0.25)
    assert np.diag(p).real.tolist() == [0, 1, 1, 0, 0, 0, 0, 0]
    with pytest.raises(ValueError):
        region_projector(g, 0.5, 0.2)


def test_cl_setup_symmetric_populations():
    params = CLParams()
    g = build_grid_1d(4, params.hbar)
    v = double_well_potential(g)
    s = cl_setup(g, params, v)
    pop_b = np.trace(s.rho_eq @ s.theta_B).real
    assert s.population_A == pytest.approx(pop_b, rel=1e-8)
    assert 0.3 < s.population_A < 0.6


def test_fixed_point_is_stationary():
    params = CLParams()
    g = build_grid_1d(3, params.hbar)
    model = caldeira_leggett_model(g, params, double_well_potential(g))
    rho = lindblad_fixed_point(model)
    assert np.abs(apply_generator(model, rho)).max() < 1e-8
    assert abs(np.trace(rho) - 1) < 1e-12
