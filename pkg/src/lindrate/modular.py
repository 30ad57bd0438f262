"""Ancilla-based modular Lindblad evolution, one dilation step at a time.

A step couples the system to a (d+1)-level ancilla through the
pseudo-Hamiltonian ``J`` (ancilla factor first) for a time ``sqrt(delta)``.

* Schrodinger step: ancilla starts in ``|0><0|``, is traced out, then the
  system is conjugated by ``exp(-i H delta)``.
* Heisenberg step: ancilla starts fully mixed, the ``|0><0|`` ancilla block is
  kept (post-selection), rescaled by ``d+1``, then conjugated by
  ``exp(+i H delta)``.

Both are first order in ``delta``. The post-selection is taken
deterministically; its probability is returned alongside.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lindblad import LindbladModel, Picture
from .operators import HermitianPropagator, as_square, dag, tensor


@dataclass(frozen=True)
class ModularConfig:
    steps: int
    total_time: float
    picture: Picture = Picture.HEISENBERG

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps}")
        if self.total_time < 0:
            raise ValueError(f"total_time must be non-negative, got {self.total_time}")
        object.__setattr__(self, "picture", Picture.parse(self.picture))

    @property
    def delta(self) -> float:
        return self.total_time / self.steps


@dataclass(frozen=True)
class ModularResult:
    """Evolved operator and post-selection probability.

    The probability shrinks like ``(d+1)^-N`` and underflows for long runs;
    ``log_success_probability`` keeps the natural log exactly.
    """

    operator: np.ndarray
    success_probability: float
    log_success_probability: float = 0.0


def build_pseudo_hamiltonian(model: LindbladModel) -> np.ndarray:
    """Block matrix with ``L_k^dag`` in the first block row and ``L_k`` in the first block column."""
    d = len(model.lindblads)
    if d < 1:
        raise ValueError("pseudo-Hamiltonian needs at least one Lindblad operator")
    s = model.dim
    j = np.zeros(((d + 1) * s, (d + 1) * s), dtype=complex)
    for k, l in enumerate(model.lindblads, start=1):
        j[0:s, k * s:(k + 1) * s] = dag(l)
        j[k * s:(k + 1) * s, 0:s] = l
    return j


class StepOperators:
    """Exponentials for one ``(model, delta)`` pair, computed once and reused."""

    def __init__(self, model: LindbladModel, delta: float):
        if not delta > 0:
            raise ValueError(f"delta must be positive, got {delta}")
        self.model = model
        self.delta = delta
        s = model.dim
        self.n_anc = len(model.lindblads) + 1
        tau = delta / model.hbar
        if model.lindblads:
            u = HermitianPropagator(build_pseudo_hamiltonian(model)).unitary(np.sqrt(tau))
        else:
            u = np.eye(s, dtype=complex)
        self.joint = u
        # system blocks of the joint unitary, indexed [ancilla_out][ancilla_in]
        self.blocks = [
            [u[a * s:(a + 1) * s, b * s:(b + 1) * s] for b in range(self.n_anc)]
            for a in range(self.n_anc)
        ] if model.lindblads else [[u]]
        ham = HermitianPropagator(model.hamiltonian)
        self.u_forward = ham.unitary(tau)  # exp(-i H delta / hbar)
        self.u_backward = dag(self.u_forward)  # exp(+i H delta / hbar)


def schrodinger_step(model: LindbladModel, rho, delta: float, ops: StepOperators | None = None) -> np.ndarray:
    """One Schrodinger-picture dilation step; trace preserving for any input."""
    ops = ops or StepOperators(model, delta)
    rho = as_square(rho, "rho")
    # Tr_anc[U (|0><0| x rho) U^dag] = sum_a U_{a0} rho U_{a0}^dag
    out = np.zeros_like(rho)
    for a in range(ops.n_anc):
        k = ops.blocks[a][0]
        out += k @ rho @ dag(k)
    return ops.u_forward @ out @ ops.u_backward


def heisenberg_step(model: LindbladModel, theta, delta: float, ops: StepOperators | None = None):
    """One post-selected Heisenberg-picture step.

    Returns ``(theta_next, step_probability)``. The probability is the
    weight of the ``|0>`` ancilla outcome relative to the input trace; for a
    traceless input it is evaluated on the maximally mixed system state.
    """
    ops = ops or StepOperators(model, delta)
    theta = as_square(theta, "theta")
    n = ops.n_anc
    # <0|U (I/n x theta) U^dag|0> = (1/n) sum_a U_{0a} theta U_{0a}^dag
    block = np.zeros_like(theta)
    for a in range(n):
        k = ops.blocks[0][a]
        block += k @ theta @ dag(k)
    block /= n
    tr_in = np.trace(theta)
    if abs(tr_in) > 1e-12 * max(1.0, np.max(np.abs(theta))):
        prob = float((np.trace(block) / tr_in).real)
    else:
        s = theta.shape[0]
        prob = float(sum(np.trace(ops.blocks[0][a] @ dag(ops.blocks[0][a])).real for a in range(n)) / (n * s))
    out = ops.u_backward @ (n * block) @ ops.u_forward
    return out, prob


def heisenberg_step_dense(model: LindbladModel, theta, delta: float):
    """Reference Heisenberg step on the full ancilla-system space.

    Builds the joint state explicitly and applies the ancilla projector; used
    to check the block-contracted ``heisenberg_step``.
    """
    ops = StepOperators(model, delta)
    n = ops.n_anc
    s = model.dim
    joint = tensor(np.eye(n) / n, theta)
    evolved = ops.joint @ joint @ dag(ops.joint)
    proj = np.zeros((n, n))
    proj[0, 0] = 1
    kept = tensor(proj, np.eye(s)) @ evolved @ tensor(proj, np.eye(s))
    block = kept[:s, :s]
    prob = float((np.trace(block) / np.trace(joint)).real)
    return ops.u_backward @ (n * block) @ ops.u_forward, prob


def schrodinger_step_dense(model: LindbladModel, rho, delta: float) -> np.ndarray:
    """Reference Schrodinger step with an explicit partial trace over the ancilla."""
    from .operators import partial_trace

    ops = StepOperators(model, delta)
    n = ops.n_anc
    anc = np.zeros((n, n))
    anc[0, 0] = 1
    evolved = ops.joint @ tensor(anc, rho) @ dag(ops.joint)
    red = partial_trace(evolved, [n, model.dim], keep=[1])
    return ops.u_forward @ red @ ops.u_backward


def evolve_modular(model: LindbladModel, a, config: ModularConfig, ops: StepOperators | None = None) -> ModularResult:
    """Iterate the picture's step ``config.steps`` times with ``delta = t / N``."""
    a = as_square(a, "a")
    if config.total_time == 0:
        return ModularResult(a.copy(), 1.0)
    if ops is None or not np.isclose(ops.delta, config.delta, rtol=1e-15, atol=0):
        ops = StepOperators(model, config.delta)
    x = a.copy()
    log_prob = 0.0
    if config.picture is Picture.SCHRODINGER:
        for _ in range(config.steps):
            x = schrodinger_step(model, x, config.delta, ops)
    else:
        for _ in range(config.steps):
            x, p = heisenberg_step(model, x, config.delta, ops)
            log_prob += np.log(p) if p > 0 else -np.inf
    return ModularResult(x, float(np.exp(log_prob)), float(log_prob))
