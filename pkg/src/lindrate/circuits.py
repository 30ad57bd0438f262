"""Mixed-state transition-rate circuits simulated on the full density operator.

Heisenberg circuit wires, top to bottom (tensor order left to right):
control qubit, theta_B channel, theta_A channel, rho_eq channel.
Schrodinger circuit wires: control qubit, theta_B channel, rho_eq channel.

Both circuits read out ``Tr(sigma_z^c Phi_final)``. The ``*_readout``
functions return that number literally; the trace-formula functions give the
same numbers in closed form and are used for systems too large for the full
tensor.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .operators import HADAMARD, SIGMA_Z, as_square, dag, tensor
from .problem import TransitionSetup

MAX_CIRCUIT_DIM = 256
IMAG_RESIDUE_TOL = 1e-9


class InconsistentInputsError(ValueError):
    """A nominally real expectation value came out with a large imaginary part."""


@dataclass(frozen=True, eq=False)
class CircuitParams:
    """Phase ``chi`` on the control and the controlled operators ``N`` (theta_B wire) and ``M``."""

    chi: float = 0.0
    n_gate: np.ndarray | None = None
    m_gate: np.ndarray | None = None

    def gates(self, dim: int) -> tuple[np.ndarray, np.ndarray]:
        eye = np.eye(dim, dtype=complex)
        n = eye if self.n_gate is None else as_square(self.n_gate, "n_gate")
        m = eye if self.m_gate is None else as_square(self.m_gate, "m_gate")
        if n.shape != (dim, dim) or m.shape != (dim, dim):
            raise ValueError(f"controlled gates must be {dim}x{dim}")
        return n, m


@dataclass(frozen=True)
class ExpectationEstimate:
    value: float
    success_probability: float = 1.0
    shots: int | None = None
    standard_error: float | None = None


def phase_gate(chi: float) -> np.ndarray:
    """``exp(-i chi (sigma_z - 1) / 2) = diag(1, e^{i chi})``."""
    return np.diag([1.0, np.exp(1j * chi)])


def plus_state() -> np.ndarray:
    return np.full((2, 2), 0.5, dtype=complex)


def real_part_checked(z: complex, scale: float = 1.0) -> float:
    if abs(z.imag) > IMAG_RESIDUE_TOL * max(1.0, scale):
        raise InconsistentInputsError(f"imaginary residue {z.imag:.3e} in a real expectation value")
    return float(z.real)


# --------------------------------------------------------------------------
# gates on composite spaces


def mixed_swap(theta_A, rho_eq) -> np.ndarray:
    """Equal mixture of ``theta_A x rho_eq`` and its swap."""
    a, r = as_square(theta_A, "theta_A"), as_square(rho_eq, "rho_eq")
    if a.shape != r.shape:
        raise ValueError("mixed_swap needs equal dimensions")
    return 0.5 * (np.kron(a, r) + np.kron(r, a))


def _permutation_matrix(dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Unitary sending ``|i_0 ... i_n>`` to the basis state with factors reordered by ``perm``.

    Output factor ``j`` carries input factor ``perm[j]``.
    """
    dims = list(dims)
    total = int(np.prod(dims))
    idx = np.arange(total).reshape(dims)
    out_idx = np.transpose(idx, perm).reshape(-1)
    p = np.zeros((total, total))
    p[np.arange(total), out_idx] = 1.0
    return p


def controlled_unitary(dims: Sequence[int], control: int, target_op: np.ndarray) -> np.ndarray:
    """``|0><0| x I + |1><1| x target_op`` where ``target_op`` acts on all non-control factors.

    ``target_op`` is given on the full space with the control removed; it need not be unitary.
    """
    dims = list(dims)
    if dims[control] != 2:
        raise ValueError("control factor must be a qubit")
    rest = int(np.prod(dims)) // 2
    full = np.zeros((2 * rest, 2 * rest), dtype=complex)
    full[:rest, :rest] = np.eye(rest)
    full[rest:, rest:] = target_op
    if control == 0:
        return full
    # move control to the front, apply, move back
    order = [control] + [i for i in range(len(dims)) if i != control]
    fwd = _permutation_matrix(dims, order)
    return fwd.T @ full @ fwd


def embed(op: np.ndarray, dims: Sequence[int], factor: int) -> np.ndarray:
    """``op`` acting on one tensor factor, identity on the others."""
    mats = [np.eye(d, dtype=complex) for d in dims]
    mats[factor] = as_square(op)
    return tensor(*mats)


def controlled_op(dims: Sequence[int], control: int, factor: int, op: np.ndarray) -> np.ndarray:
    """Controlled ``op`` on a single factor; ``control`` must precede ``factor`` is not required."""
    others = [d for i, d in enumerate(dims) if i != control]
    f = factor - (1 if factor > control else 0)
    return controlled_unitary(dims, control, embed(op, others, f))


def controlled_swap_blocks(phi, dims: Sequence[int], control_factor: int, swap_pair: tuple[int, int]) -> np.ndarray:
    """Apply a controlled SWAP of two equal-dimension factors to a density operator.

    On the control's ``|0><0|`` block nothing happens, on ``|1><1|`` both sides
    are swapped, and on the off-diagonal blocks only the ket (``|1><0|``) or the
    bra (``|0><1|``) side is swapped.
    """
    phi = as_square(phi, "phi")
    dims = list(dims)
    if int(np.prod(dims)) != phi.shape[0]:
        raise ValueError(f"dims {dims} do not match operator dimension {phi.shape[0]}")
    i, j = swap_pair
    if dims[i] != dims[j]:
        raise ValueError(f"swapped factors have different dimensions {dims[i]} and {dims[j]}")
    if dims[control_factor] != 2:
        raise ValueError("control factor must be a qubit")
    perm = list(range(len(dims)))
    perm[i], perm[j] = perm[j], perm[i]
    others = [d for k, d in enumerate(dims) if k != control_factor]
    other_perm = [k - (k > control_factor) for k in perm if k != control_factor]
    swap = _permutation_matrix(others, other_perm)
    cs = controlled_unitary(dims, control_factor, swap)
    return cs @ phi @ cs.T


def apply_map_on_factor(phi: np.ndarray, dims: Sequence[int], factor: int, fn: Callable) -> np.ndarray:
    """Apply a linear map ``fn`` (on ``dims[factor]``-square matrices) to one factor of ``phi``."""
    dims = list(dims)
    n = len(dims)
    t = phi.reshape(dims + dims)
    # bring (row_factor, col_factor) to the end
    order = [k for k in range(n) if k != factor] + [n + k for k in range(n) if k != factor] + [factor, n + factor]
    moved = np.transpose(t, order)
    lead = moved.shape[:-2]
    flat = moved.reshape(-1, dims[factor], dims[factor])
    out = np.stack([fn(b) for b in flat]).reshape(lead + (dims[factor], dims[factor]))
    inv = np.argsort(order)
    return np.transpose(out, inv).reshape(phi.shape)


def control_z_readout(phi: np.ndarray, dims: Sequence[int]) -> float:
    """``Tr(sigma_z on the control (factor 0) x I elsewhere . phi)``."""
    z = embed(SIGMA_Z, dims, 0)
    return real_part_checked(np.trace(z @ phi), np.max(np.abs(phi)) * phi.shape[0])


# --------------------------------------------------------------------------
# Heisenberg-picture circuit


def heisenberg_circuit_state(setup: TransitionSetup, theta_B_t, params: CircuitParams) -> np.ndarray:
    """Final density operator of the Heisenberg circuit before measurement.

    ``theta_B_t`` is the already-evolved theta_B wire.
    """
    s = setup.dim
    dims = [2, s, s, s]
    if int(np.prod(dims)) > MAX_CIRCUIT_DIM:
        raise ValueError(f"composite dimension {np.prod(dims)} exceeds {MAX_CIRCUIT_DIM}; use the trace formula")
    n_gate, m_gate = params.gates(s)
    r = phase_gate(params.chi)
    control = r @ plus_state() @ dag(r)
    phi = np.kron(np.kron(control, as_square(theta_B_t)), mixed_swap(setup.theta_A, setup.rho_eq))
    for factor, op in ((1, n_gate), (2, m_gate)):
        g = controlled_op(dims, 0, factor, op)
        phi = g @ phi @ dag(g)
    phi = controlled_swap_blocks(phi, dims, 0, (1, 2))
    phi = controlled_swap_blocks(phi, dims, 0, (2, 3))
    h = embed(HADAMARD, dims, 0)
    return h @ phi @ dag(h)


def heisenberg_circuit_readout(setup: TransitionSetup, theta_B_t, params: CircuitParams) -> float:
    """Literal ``Tr(sigma_z^c Phi_4)`` of the Heisenberg circuit.

    The mS mixture gives every interfering branch weight 1/2, so this is half
    of ``trace_formula_expectation``.
    """
    s = setup.dim
    return control_z_readout(heisenberg_circuit_state(setup, theta_B_t, params), [2, s, s, s])


def trace_formula_expectation(setup: TransitionSetup, theta_B_t, params: CircuitParams) -> float:
    """``(1/2) < e^{-i chi} {A, M^dag B(t) N^dag} + e^{i chi} {A, N B(t) M} >_eq``."""
    b = as_square(theta_B_t, "theta_B_t")
    n_gate, m_gate = params.gates(setup.dim)
    a, rho = setup.theta_A, setup.rho_eq
    x1 = dag(m_gate) @ b @ dag(n_gate)
    x2 = n_gate @ b @ m_gate
    op = np.exp(-1j * params.chi) * (a @ x1 + x1 @ a) + np.exp(1j * params.chi) * (a @ x2 + x2 @ a)
    val = 0.5 * np.trace(rho @ op)
    return real_part_checked(val, np.max(np.abs(op)))


def heisenberg_denominator_readout(setup: TransitionSetup) -> float:
    """Reduced circuit without the theta_B wire and mS gate: returns ``<theta_A>_eq``."""
    s = setup.dim
    dims = [2, s, s]
    phi = tensor(plus_state(), setup.theta_A, setup.rho_eq)
    phi = controlled_swap_blocks(phi, dims, 0, (1, 2))
    h = embed(HADAMARD, dims, 0)
    return control_z_readout(h @ phi @ dag(h), dims)


# --------------------------------------------------------------------------
# Schrodinger-picture circuit


def schrodinger_circuit_readout(setup: TransitionSetup, gate_A, evolve: Callable, params: CircuitParams) -> float:
    """Literal ``Tr(sigma_z^c Phi_6)`` of the Schrodinger circuit.

    ``gate_A`` is the operator applied (controlled) to the rho_eq wire before
    evolution; the true circuit uses ``theta_A`` itself, the experiment-style
    decomposition uses ``I`` and the reflection ``2 theta_A - I``. ``evolve``
    is the linear map ``e^{L t}`` on system operators.
    """
    s = setup.dim
    dims = [2, s, s]
    if int(np.prod(dims)) > MAX_CIRCUIT_DIM:
        raise ValueError(f"composite dimension {np.prod(dims)} exceeds {MAX_CIRCUIT_DIM}; use the trace formula")
    n_gate, m_gate = params.gates(s)
    r = phase_gate(params.chi)
    phi = tensor(r @ plus_state() @ dag(r), setup.theta_B, setup.rho_eq)
    g = controlled_op(dims, 0, 2, as_square(gate_A, "gate_A"))
    phi = g @ phi @ dag(g)
    g = controlled_op(dims, 0, 1, n_gate)
    phi = g @ phi @ dag(g)
    phi = apply_map_on_factor(phi, dims, 2, evolve)
    g = controlled_op(dims, 0, 2, m_gate)
    phi = g @ phi @ dag(g)
    phi = controlled_swap_blocks(phi, dims, 0, (1, 2))
    h = embed(HADAMARD, dims, 0)
    return control_z_readout(h @ phi @ dag(h), dims)


def schrodinger_trace_formula(theta_B, evolved_g_rho, params: CircuitParams) -> float:
    """``(1/2)[e^{-i chi} Tr(B N^dag E^dag M^dag) + e^{i chi} Tr(B M E N)]`` with ``E = e^{Lt}(G rho)``.

    Uses ``e^{Lt}(rho G^dag) = e^{Lt}(G rho)^dag`` (the evolution preserves adjoints).
    """
    b = as_square(theta_B)
    e = as_square(evolved_g_rho)
    n_gate, m_gate = params.gates(b.shape[0])
    val = 0.5 * (
        np.exp(-1j * params.chi) * np.trace(b @ dag(n_gate) @ dag(e) @ dag(m_gate))
        + np.exp(1j * params.chi) * np.trace(b @ m_gate @ e @ n_gate)
    )
    return real_part_checked(val, np.max(np.abs(e)) * max(1.0, np.max(np.abs(m_gate)) * np.max(np.abs(n_gate))))


def schrodinger_denominator_readout(setup: TransitionSetup) -> float:
    """Schrodinger reduced circuit (theta_B wire set to I, no evolution): ``<theta_A>_eq``."""
    s = setup.dim
    dims = [2, s, s]
    phi = tensor(plus_state(), np.eye(s), setup.rho_eq)
    g = controlled_op(dims, 0, 2, setup.theta_A)
    phi = g @ phi @ dag(g)
    phi = controlled_swap_blocks(phi, dims, 0, (1, 2))
    h = embed(HADAMARD, dims, 0)
    return control_z_readout(h @ phi @ dag(h), dims)
