"""Lindblad generators in both pictures and reference propagators.

``propagate_exact`` exponentiates the column-stacked superoperator and is the
ground truth wherever the system dimension allows it. ``propagate_rk4`` is a
fixed-step cross-check and the fallback for larger systems.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .operators import as_square, check_hermitian, dag

MAX_EXACT_DIM = 64  # superoperator is dim**2 x dim**2


class Picture(enum.Enum):
    SCHRODINGER = "schrodinger"
    HEISENBERG = "heisenberg"

    @classmethod
    def parse(cls, value) -> "Picture":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower().replace("ö", "o"))


class DivergenceError(RuntimeError):
    """Integration produced non-finite values."""

    def __init__(self, step: int):
        self.step = step
        super().__init__(f"non-finite values at integration step {step}")


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Hamiltonian, jump operators and hbar of a Markovian open system.

    Rates are absorbed into the jump operators, so the dissipator carries
    only the overall ``1/hbar``.
    """

    hamiltonian: np.ndarray
    lindblads: tuple = field(default_factory=tuple)
    hbar: float = 1.0

    def __post_init__(self):
        h = check_hermitian(self.hamiltonian, "hamiltonian")
        object.__setattr__(self, "hamiltonian", h)
        ls = tuple(as_square(l, "lindblad operator") for l in self.lindblads)
        for l in ls:
            if l.shape != h.shape:
                raise ValueError(f"lindblad operator shape {l.shape} != hamiltonian shape {h.shape}")
        object.__setattr__(self, "lindblads", ls)
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @cached_property
    def _ldl(self) -> tuple:
        return tuple(dag(l) @ l for l in self.lindblads)

    @cached_property
    def superoperator(self) -> np.ndarray:
        return liouvillian(self, Picture.SCHRODINGER)

    @cached_property
    def adjoint_superoperator(self) -> np.ndarray:
        return liouvillian(self, Picture.HEISENBERG)


def _check_dim(model: LindbladModel, a, name: str) -> np.ndarray:
    a = as_square(a, name)
    if a.shape != (model.dim, model.dim):
        raise ValueError(f"{name} shape {a.shape} does not match model dimension {model.dim}")
    return a


def apply_generator(model: LindbladModel, rho) -> np.ndarray:
    """Schrodinger-picture generator applied to ``rho``."""
    rho = _check_dim(model, rho, "rho")
    h = model.hamiltonian
    out = -1j * (h @ rho - rho @ h)
    for l, ldl in zip(model.lindblads, model._ldl):
        out += l @ rho @ dag(l) - 0.5 * (ldl @ rho + rho @ ldl)
    return out / model.hbar


def apply_adjoint_generator(model: LindbladModel, theta) -> np.ndarray:
    """Heisenberg-picture generator applied to the observable ``theta``."""
    theta = _check_dim(model, theta, "theta")
    h = model.hamiltonian
    out = 1j * (h @ theta - theta @ h)
    for l, ldl in zip(model.lindblads, model._ldl):
        out += dag(l) @ theta @ l - 0.5 * (ldl @ theta + theta @ ldl)
    return out / model.hbar


def generator(model: LindbladModel, picture: Picture):
    if Picture.parse(picture) is Picture.SCHRODINGER:
        return lambda a: apply_generator(model, a)
    return lambda a: apply_adjoint_generator(model, a)


def vec(a: np.ndarray) -> np.ndarray:
    """Column-stacking vectorisation."""
    return np.asarray(a).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


def liouvillian(model: LindbladModel, picture: Picture) -> np.ndarray:
    """Superoperator matrix acting on column-stacked operators.

    Uses ``vec(A X B) = (B^T kron A) vec(X)``.
    """
    picture = Picture.parse(picture)
    d = model.dim
    eye = np.eye(d)
    h = model.hamiltonian
    sign = -1j if picture is Picture.SCHRODINGER else 1j
    sup = sign * (np.kron(eye, h) - np.kron(h.T, eye))
    for l, ldl in zip(model.lindblads, model._ldl):
        if picture is Picture.SCHRODINGER:
            jump = np.kron(l.conj(), l)  # L X L^dag
        else:
            jump = np.kron(l.T, dag(l))  # L^dag X L
        sup += jump - 0.5 * (np.kron(eye, ldl) + np.kron(ldl.T, eye))
    return sup / model.hbar


def _superop(model: LindbladModel, picture: Picture) -> np.ndarray:
    if picture is Picture.SCHRODINGER:
        return model.superoperator
    return model.adjoint_superoperator


def exact_propagator(model: LindbladModel, t: float, picture: Picture) -> np.ndarray:
    """``exp(t * superoperator)`` for the given picture."""
    picture = Picture.parse(picture)
    if model.dim > MAX_EXACT_DIM:
        raise ValueError(
            f"system dimension {model.dim} exceeds {MAX_EXACT_DIM}; use propagate_rk4"
        )
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    return expm(t * _superop(model, picture))


def propagate_exact(model: LindbladModel, a, t: float, picture: Picture = Picture.HEISENBERG) -> np.ndarray:
    """Apply ``exp(t L)`` (Schrodinger) or ``exp(t L^dag)`` (Heisenberg) to ``a``.

    ``a`` may be any square matrix of the model dimension; propagation is linear.
    """
    a = _check_dim(model, a, "a")
    if t == 0:
        return a.copy()
    prop = exact_propagator(model, t, picture)
    return unvec(prop @ vec(a), model.dim)


def propagate_exact_many(model: LindbladModel, ops: Sequence, t: float, picture: Picture) -> list:
    """Propagate several operators through one shared superoperator exponential."""
    ops = [_check_dim(model, a, "a") for a in ops]
    if t == 0:
        return [a.copy() for a in ops]
    prop = exact_propagator(model, t, picture)
    return [unvec(prop @ vec(a), model.dim) for a in ops]


def propagate_rk4(model: LindbladModel, a, t: float, dt: float, picture: Picture = Picture.HEISENBERG) -> np.ndarray:
    """Classical fixed-step RK4; the last step is shortened to land on ``t``."""
    a = _check_dim(model, a, "a")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if t == 0:
        return a.copy()
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    f = generator(model, picture)
    y = a.copy()
    n_full = int(np.floor(t / dt + 1e-12))
    steps = [dt] * n_full
    rest = t - n_full * dt
    if rest > 1e-14 * max(t, 1.0):
        steps.append(rest)
    def stage(x, i):
        if not np.all(np.isfinite(x)):
            raise DivergenceError(i)
        return f(x)

    # overflow is detected explicitly below, so numpy's warnings add nothing
    with np.errstate(over="ignore", invalid="ignore"):
        for i, h in enumerate(steps):
            k1 = stage(y, i)
            k2 = stage(y + 0.5 * h * k1, i)
            k3 = stage(y + 0.5 * h * k2, i)
            k4 = stage(y + h * k3, i)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(y)):
                raise DivergenceError(i)
    return y
