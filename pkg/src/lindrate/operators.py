"""Dense complex linear algebra shared by every other module.

Operators are plain ``numpy`` complex arrays of shape ``(d, d)``. Composite
spaces are ordered left to right as they appear in a tensor product, with
row-major (C order) multi-indices.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_FLOOR = -1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = (SIGMA_X + SIGMA_Z) / np.sqrt(2)


class InvalidStateError(ValueError):
    """Raised when a matrix fails one or more density-operator checks.

    ``violations`` lists every failed invariant by name
    (``"hermiticity"``, ``"trace"``, ``"positivity"``).
    """

    def __init__(self, violations: dict[str, str]):
        self.violations = violations
        super().__init__("; ".join(f"{k}: {v}" for k, v in violations.items()))


def as_square(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def dag(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def hermiticity_error(m: np.ndarray) -> float:
    """Max-norm of ``m - m^dagger`` relative to the max-norm of ``m``."""
    scale = np.max(np.abs(m))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(m - dag(m))) / scale)


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_error(m) <= tol


def check_hermitian(m, name: str = "operator") -> np.ndarray:
    a = as_square(m, name)
    err = hermiticity_error(a)
    if err > HERMITIAN_TOL:
        raise ValueError(f"{name} is not Hermitian (relative error {err:.3e})")
    return a


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more square matrices, left factor outermost."""
    if not ops:
        raise ValueError("tensor needs at least one factor")
    out = as_square(ops[0])
    for op in ops[1:]:
        out = np.kron(out, as_square(op))
    return out


def partial_trace(m: np.ndarray, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every factor of ``m`` not listed in ``keep``.

    ``dims`` gives the factor dimensions in tensor order. The kept factors
    stay in their original relative order.
    """
    m = as_square(m)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims):
        raise ValueError(f"factor dimensions must be positive, got {dims}")
    if int(np.prod(dims)) != m.shape[0]:
        raise ValueError(f"dims {dims} do not multiply to matrix dimension {m.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= len(dims):
        raise ValueError(f"keep must be a nonempty subset of factor indices 0..{len(dims) - 1}")

    n = len(dims)
    t = m.reshape(dims + dims)
    # einsum labels: row index i, column index n+i; traced factors share a label
    row = list(range(n))
    col = [n + i if i in keep else i for i in range(n)]
    out_labels = [i for i in keep] + [n + i for i in keep]
    res = np.einsum(t, row + col, out_labels)
    dk = int(np.prod([dims[i] for i in keep]))
    return res.reshape(dk, dk)


def hermitian_expm_unitary(h, scale: float) -> np.ndarray:
    """Return ``exp(-1j * scale * h)`` for Hermitian ``h`` via eigendecomposition."""
    h = check_hermitian(h, "h")
    w, v = np.linalg.eigh((h + dag(h)) / 2)
    return (v * np.exp(-1j * scale * w)) @ dag(v)


class HermitianPropagator:
    """Eigendecomposition of a Hermitian operator kept for repeated exponentials."""

    def __init__(self, h):
        h = check_hermitian(h, "h")
        self.eigvals, self.eigvecs = np.linalg.eigh((h + dag(h)) / 2)

    def unitary(self, scale: float) -> np.ndarray:
        v = self.eigvecs
        return (v * np.exp(-1j * scale * self.eigvals)) @ dag(v)


def validate_density(m) -> np.ndarray:
    """Return ``m`` if it is a valid density operator, else raise ``InvalidStateError``.

    Every violated invariant is reported, not just the first one found.
    """
    a = as_square(m, "density operator")
    violations = {}
    herr = hermiticity_error(a)
    if herr > HERMITIAN_TOL:
        violations["hermiticity"] = f"relative error {herr:.3e}"
    tr = np.trace(a)
    if abs(tr - 1) > TRACE_TOL:
        violations["trace"] = f"trace is {tr.real:.6g}{tr.imag:+.3g}j, expected 1"
    w = np.linalg.eigvalsh((a + dag(a)) / 2)
    if w[0] < PSD_FLOOR:
        violations["positivity"] = f"minimum eigenvalue {w[0]:.3e}"
    if violations:
        raise InvalidStateError(violations)
    return a


def validate_observable(m, name: str = "observable") -> np.ndarray:
    return check_hermitian(m, name)


def is_projector(m: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.max(np.abs(m @ m - m)) <= tol)


def max_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a)))


def pauli_coefficients(m: np.ndarray) -> dict[str, complex]:
    """Coefficients of I, X, Y, Z in the Pauli expansion of a 2x2 matrix."""
    m = as_square(m)
    if m.shape != (2, 2):
        raise ValueError("pauli_coefficients needs a 2x2 matrix")
    return {
        "I": np.trace(m) / 2,
        "x": np.trace(SIGMA_X @ m) / 2,
        "y": np.trace(SIGMA_Y @ m) / 2,
        "z": np.trace(SIGMA_Z @ m) / 2,
    }
