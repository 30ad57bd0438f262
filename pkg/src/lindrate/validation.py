"""Quick invariant checks behind ``lindrate validate``."""
from __future__ import annotations

import numpy as np

from .circuits import CircuitParams, heisenberg_circuit_readout, trace_formula_expectation
from .estimators import estimate_correlation, estimate_rate_heisenberg, estimate_rate_schrodinger, heisenberg_terms
from .harness import loglog_slope
from .modular import ModularConfig
from .models import SpinHalfParams, build_grid_1d, double_well, spin_half_analytic, spin_half_model
from .problem import TransitionSetup


def _random_case(rng):
    def herm(d=2):
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        return (a + a.conj().T) / 2

    def unitary(d=2):
        q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        return q * (np.diag(r) / np.abs(np.diag(r)))

    def projector():
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        return np.outer(v, v.conj())

    w = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = w @ w.conj().T
    setup = TransitionSetup(projector(), projector(), rho / np.trace(rho))
    return setup, herm(), CircuitParams(rng.uniform(-np.pi, np.pi), unitary(), unitary())


def run_checks(seed: int = 7) -> list[tuple[str, bool, str]]:
    out = []
    p = SpinHalfParams()
    model, setup = spin_half_model(p)

    err = 0.0
    for t in np.linspace(0, 2, 11):
        a = spin_half_analytic(p, t)
        err = max(err, abs(estimate_correlation(model, setup, t) - a.C), abs(estimate_rate_heisenberg(model, setup, t) - a.Cdot))
    out.append(("spin-1/2 analytic", err <= 1e-10, f"max abs error {err:.2e}"))

    rng = np.random.default_rng(seed)
    err = 0.0
    for _ in range(50):
        s, b_t, params = _random_case(rng)
        err = max(err, abs(2 * heisenberg_circuit_readout(s, b_t, params) - trace_formula_expectation(s, b_t, params)))
    out.append(("circuit vs trace formula", err <= 1e-12, f"max abs difference {err:.2e}"))

    err = max(abs(estimate_rate_heisenberg(model, setup, t) - estimate_rate_schrodinger(model, setup, t)) for t in (0.2, 0.6, 1.0))
    out.append(("picture duality", err <= 1e-10, f"max abs difference {err:.2e}"))

    ns = [10, 20, 40, 80]
    ref = spin_half_analytic(p, 1.0).Cdot
    errs = [(ref - heisenberg_terms(model, setup, 1.0, ModularConfig(n, 1.0), "modular").rate) / ref for n in ns]
    slope = loglog_slope(ns, errs)
    out.append(("modular first order", abs(slope + 1) <= 0.3, f"log-log slope {slope:.3f}"))

    grid = build_grid_1d(4, 0.01)
    unit = np.max(np.abs(grid.fourier.conj().T @ grid.fourier - np.eye(grid.dim)))
    ok = np.isclose(grid.delta_x * grid.delta_p, 2 * np.pi * 0.01 / 16, rtol=1e-14) and unit <= 1e-10
    ok = ok and np.isclose(double_well(0.5), 0.162)
    out.append(("grid construction", bool(ok), f"unitarity defect {unit:.2e}"))
    return out
