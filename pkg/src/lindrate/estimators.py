"""Correlation function and transition rate from circuit expectation values.

Heisenberg route: evolve ``theta_B`` once, then evaluate the expectation
families ``E_H``, ``E_J``, ``E_AC`` (one pair per jump operator) and divide by
``2 E_D``. Schrodinger route: evolve the one-sided products
``G rho_eq`` once and evaluate the five terms ``E_H1 .. E_AC2``.

Evolvers: ``"exact"`` (superoperator exponential), ``"modular"`` (dilation
steps, ``config.steps`` per call) and ``"rk4"``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuits import (
    CircuitParams,
    ExpectationEstimate,
    heisenberg_circuit_readout,
    heisenberg_denominator_readout,
    schrodinger_circuit_readout,
    schrodinger_denominator_readout,
    schrodinger_trace_formula,
    trace_formula_expectation,
)
from .lindblad import LindbladModel, Picture, propagate_exact_many, propagate_rk4
from .modular import ModularConfig, StepOperators, evolve_modular
from .operators import dag
from .problem import TransitionSetup

EVOLVERS = ("exact", "modular", "rk4")
METHODS = ("trace_formula", "circuit")
DEFAULT_RK4_DT = 1e-3


class UndefinedCorrelationError(ZeroDivisionError):
    """``E_D = <theta_A>_eq`` vanishes, so C(t) is undefined."""


@lru_cache(maxsize=16)
def _step_ops(model: LindbladModel, delta: float) -> StepOperators:
    return StepOperators(model, delta)


def _check_choice(value: str, allowed, name: str) -> str:
    if value not in allowed:
        raise ValueError(f"{name} must be one of {allowed}, got {value!r}")
    return value


def evolve(model: LindbladModel, ops, t: float, picture: Picture, evolver: str = "exact",
           config: ModularConfig | None = None, rk4_dt: float = DEFAULT_RK4_DT):
    """Propagate each operator in ``ops`` to time ``t``.

    Returns ``(evolved_list, success_probability)``; the probability is 1
    except for the post-selected Heisenberg modular scheme, where it refers to
    the first operator.
    """
    _check_choice(evolver, EVOLVERS, "evolver")
    picture = Picture.parse(picture)
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if evolver == "exact":
        return propagate_exact_many(model, ops, t, picture), 1.0
    if evolver == "rk4":
        return [propagate_rk4(model, a, t, rk4_dt, picture) for a in ops], 1.0
    if config is None:
        raise ValueError("modular evolver needs a ModularConfig for the step count")
    cfg = ModularConfig(config.steps, t, picture)
    if t == 0:
        return [np.array(a, dtype=complex) for a in ops], 1.0
    step_ops = _step_ops(model, cfg.delta)
    results = [evolve_modular(model, a, cfg, step_ops) for a in ops]
    return [r.operator for r in results], results[0].success_probability


# --------------------------------------------------------------------------
# denominator


def denominator(setup: TransitionSetup, method: str = "trace_formula", picture: Picture = Picture.HEISENBERG) -> float:
    """``E_D = <theta_A>_eq``; the circuit method runs the reduced circuit of the chosen picture."""
    _check_choice(method, METHODS, "method")
    if method == "trace_formula":
        return setup.population_A
    if Picture.parse(picture) is Picture.HEISENBERG:
        return heisenberg_denominator_readout(setup)
    return schrodinger_denominator_readout(setup)


def _safe_ratio(num: float, e_d: float) -> float:
    if abs(e_d) < 1e-15:
        raise UndefinedCorrelationError("E_D = <theta_A>_eq is zero; correlation undefined")
    return num / (2 * e_d)


# --------------------------------------------------------------------------
# Heisenberg picture


def heisenberg_expectation(setup: TransitionSetup, theta_B_t, params: CircuitParams, method: str = "trace_formula") -> float:
    """Circuit expectation ``E`` for one parameter choice.

    The full-tensor circuit carries the mS mixture weight 1/2 on both
    interfering branches; its readout is doubled so both methods return the
    same ``E``.
    """
    _check_choice(method, METHODS, "method")
    if method == "circuit":
        return 2.0 * heisenberg_circuit_readout(setup, theta_B_t, params)
    return trace_formula_expectation(setup, theta_B_t, params)


def simulate_heisenberg_circuit(model: LindbladModel, setup: TransitionSetup, params: CircuitParams, t: float,
                                config: ModularConfig | None = None, evolver: str = "exact") -> ExpectationEstimate:
    """Evolve ``theta_B``, run the full-tensor Heisenberg circuit, return ``E`` with its success probability."""
    (b_t,), prob = evolve(model, [setup.theta_B], t, Picture.HEISENBERG, evolver, config)
    return ExpectationEstimate(heisenberg_expectation(setup, b_t, params, "circuit"), prob)


@dataclass(frozen=True)
class HeisenbergTerms:
    E_C: float
    E_H: float
    E_J: tuple
    E_AC: tuple
    E_D: float
    success_probability: float = 1.0

    @property
    def correlation(self) -> float:
        return _safe_ratio(self.E_C, self.E_D)

    @property
    def rate(self) -> float:
        return _safe_ratio(self.E_H + sum(self.E_J) + sum(self.E_AC), self.E_D)


def heisenberg_terms_from(model: LindbladModel, setup: TransitionSetup, theta_B_t, method: str = "trace_formula",
                          success_probability: float = 1.0) -> HeisenbergTerms:
    """All Heisenberg expectation families for an already evolved ``theta_B``."""
    hb = model.hbar

    def e(chi, n=None, m=None):
        return heisenberg_expectation(setup, theta_B_t, CircuitParams(chi, n, m), method)

    e_c = e(0.0)
    e_h = 2.0 / hb * e(-np.pi / 2, None, model.hamiltonian)
    e_j = tuple(e(0.0, dag(l), l) / hb for l in model.lindblads)
    e_ac = tuple(-e(0.0, None, ldl) / hb for ldl in model._ldl)
    e_d = denominator(setup, method, Picture.HEISENBERG)
    return HeisenbergTerms(e_c, e_h, e_j, e_ac, e_d, success_probability)


def heisenberg_terms(model: LindbladModel, setup: TransitionSetup, t: float, config: ModularConfig | None = None,
                     evolver: str = "exact", method: str = "trace_formula") -> HeisenbergTerms:
    (b_t,), prob = evolve(model, [setup.theta_B], t, Picture.HEISENBERG, evolver, config)
    return heisenberg_terms_from(model, setup, b_t, method, prob)


def estimate_correlation(model: LindbladModel, setup: TransitionSetup, t: float, config: ModularConfig | None = None,
                         method: str = "trace_formula", evolver: str = "exact") -> float:
    """``C(t) = E_C / (2 E_D)`` with ``E_C`` from ``chi = 0`` and ``N = M = I``."""
    (b_t,), _ = evolve(model, [setup.theta_B], t, Picture.HEISENBERG, evolver, config)
    e_c = heisenberg_expectation(setup, b_t, CircuitParams(0.0), method)
    return _safe_ratio(e_c, denominator(setup, method, Picture.HEISENBERG))


def estimate_rate_heisenberg(model: LindbladModel, setup: TransitionSetup, t: float, config: ModularConfig | None = None,
                             evolver: str = "exact", method: str = "trace_formula") -> float:
    """``(E_H + sum_k (E_J,k + E_AC,k)) / (2 E_D)``."""
    return heisenberg_terms(model, setup, t, config, evolver, method).rate


# --------------------------------------------------------------------------
# Schrodinger picture


SCHRODINGER_TERMS = ("E_H1", "E_H2", "E_J", "E_AC1", "E_AC2")


def reflection(theta_A) -> np.ndarray:
    """Unitary ``2 theta_A - I`` built from a projector (``sigma_z`` for ``|0><0|``)."""
    a = np.asarray(theta_A, dtype=complex)
    return 2 * a - np.eye(a.shape[0])


def _schrodinger_param_table(model: LindbladModel):
    """``(name, prefactor, CircuitParams)`` for every Schrodinger expectation term."""
    hb = model.hbar
    h = model.hamiltonian
    rows = [
        ("E_H1", 1 / hb, CircuitParams(-np.pi / 2, None, h)),
        ("E_H2", 1 / hb, CircuitParams(np.pi / 2, h, None)),
    ]
    for l, ldl in zip(model.lindblads, model._ldl):
        rows += [
            ("E_J", 1 / hb, CircuitParams(0.0, dag(l), l)),
            ("E_AC1", -0.5 / hb, CircuitParams(0.0, None, ldl)),
            ("E_AC2", -0.5 / hb, CircuitParams(0.0, ldl, None)),
        ]
    return rows


def schrodinger_gate_terms(model: LindbladModel, setup: TransitionSetup, gate_A, t: float,
                           config: ModularConfig | None = None, evolver: str = "exact",
                           method: str = "trace_formula", rk4_dt: float = DEFAULT_RK4_DT) -> dict:
    """Literal circuit terms with ``gate_A`` in the controlled slot before evolution.

    Jump-operator terms are summed over ``k``. With ``gate_A = I`` and the
    reflection ``2 theta_A - I`` these are the two rows of the experiment's
    controlled-``theta_A`` decomposition.
    """
    _check_choice(method, METHODS, "method")
    g = np.asarray(gate_A, dtype=complex)
    (e_g,), _ = evolve(model, [g @ setup.rho_eq], t, Picture.SCHRODINGER, evolver, config, rk4_dt)
    out = dict.fromkeys(SCHRODINGER_TERMS, 0.0)
    if method == "circuit":
        # the full circuit evolves every block of the rho wire; use the same evolver per block
        def evo(x):
            (y,), _ = evolve(model, [x], t, Picture.SCHRODINGER, evolver, config, rk4_dt)
            return y
    for name, pref, params in _schrodinger_param_table(model):
        if method == "circuit":
            val = schrodinger_circuit_readout(setup, g, evo, params)
        else:
            val = schrodinger_trace_formula(setup.theta_B, e_g, params)
        out[name] += pref * val
    return out


@dataclass(frozen=True)
class SchrodingerTerms:
    terms: dict
    E_C: float
    E_D: float

    @property
    def correlation(self) -> float:
        return _safe_ratio(self.E_C, self.E_D)

    @property
    def rate(self) -> float:
        return _safe_ratio(sum(self.terms.values()), self.E_D)


def schrodinger_terms(model: LindbladModel, setup: TransitionSetup, t: float, config: ModularConfig | None = None,
                      evolver: str = "exact", method: str = "trace_formula",
                      rk4_dt: float = DEFAULT_RK4_DT) -> SchrodingerTerms:
    """Physical terms ``E_X = E_X[G = I] + E_X[G = 2 theta_A - I]``.

    By linearity this is ``2 E_X[G = theta_A]``: the controlled-``theta_A``
    gate is realised as the equal mixture of controlled-``I`` and
    controlled-reflection, and each half is run as its own circuit.
    """
    gates = (np.eye(setup.dim), reflection(setup.theta_A))
    halves = [schrodinger_gate_terms(model, setup, g, t, config, evolver, method, rk4_dt) for g in gates]
    terms = {k: halves[0][k] + halves[1][k] for k in SCHRODINGER_TERMS}
    evolved, _ = evolve(model, [g @ setup.rho_eq for g in gates], t, Picture.SCHRODINGER, evolver, config, rk4_dt)
    e_c = sum(schrodinger_trace_formula(setup.theta_B, e_g, CircuitParams(0.0)) for e_g in evolved)
    e_d = denominator(setup, method, Picture.SCHRODINGER)
    return SchrodingerTerms(terms, e_c, e_d)


def estimate_correlation_schrodinger(model: LindbladModel, setup: TransitionSetup, t: float,
                                     config: ModularConfig | None = None, evolver: str = "exact") -> float:
    """``Tr(theta_B e^{Lt}({rho_eq, theta_A})) / (2 <theta_A>_eq)``."""
    (e_a,), _ = evolve(model, [setup.theta_A @ setup.rho_eq], t, Picture.SCHRODINGER, evolver, config)
    e_c = 2.0 * schrodinger_trace_formula(setup.theta_B, e_a, CircuitParams(0.0))
    return _safe_ratio(e_c, setup.population_A)


def estimate_rate_schrodinger(model: LindbladModel, setup: TransitionSetup, t: float, config: ModularConfig | None = None,
                              evolver: str = "exact", method: str = "trace_formula") -> float:
    """``(E_H1 + E_H2 + E_J + E_AC1 + E_AC2) / (2 E_D)``."""
    return schrodinger_terms(model, setup, t, config, evolver, method).rate


# --------------------------------------------------------------------------
# finite shots


def sample_shots(expectation: float, shots: int, seed) -> ExpectationEstimate:
    """Emulate ``shots`` measurements of a +-1 observable with mean ``expectation``."""
    if abs(expectation) > 1 + 1e-12:
        raise ValueError(f"normalized expectation must lie in [-1, 1], got {expectation}")
    if int(shots) != shots or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots}")
    p = min(1.0, max(0.0, (1 + expectation) / 2))
    rng = np.random.default_rng(seed)
    ups = int(rng.binomial(int(shots), p))
    p_hat = ups / shots
    se = 2 * np.sqrt(p_hat * (1 - p_hat) / shots)
    return ExpectationEstimate(2 * p_hat - 1, 1.0, int(shots), float(se))


def heisenberg_normalization(setup: TransitionSetup, theta_B_t, params: CircuitParams) -> float:
    """Bound that maps a Heisenberg ``E`` into ``[-1, 1]``.

    ``2 Tr|theta_A| Tr|theta_B(t)| ||N|| ||M||`` with spectral norms; the
    factor 2 undoes the mS weight.
    """
    n_gate, m_gate = params.gates(setup.dim)
    tr_b = float(np.sum(np.abs(np.linalg.eigvalsh((theta_B_t + dag(theta_B_t)) / 2))))
    tr_a = float(np.sum(np.abs(np.linalg.eigvalsh(setup.theta_A))))
    return 2 * tr_a * tr_b * np.linalg.norm(n_gate, 2) * np.linalg.norm(m_gate, 2)
