"""The (theta_A, theta_B, rho_eq) triple that defines a transition problem."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import check_hermitian, is_projector, validate_density


@dataclass(frozen=True, eq=False)
class TransitionSetup:
    """Region projectors ``theta_A``, ``theta_B`` and the equilibrium state.

    Both projectors must be idempotent to 1e-10 and share the dimension of
    ``rho_eq``.
    """

    theta_A: np.ndarray
    theta_B: np.ndarray
    rho_eq: np.ndarray

    def __post_init__(self):
        a = check_hermitian(self.theta_A, "theta_A")
        b = check_hermitian(self.theta_B, "theta_B")
        rho = validate_density(self.rho_eq)
        if not (a.shape == b.shape == rho.shape):
            raise ValueError(f"shape mismatch: theta_A {a.shape}, theta_B {b.shape}, rho_eq {rho.shape}")
        for name, p in (("theta_A", a), ("theta_B", b)):
            if not is_projector(p):
                raise ValueError(f"{name} is not a projector")
        object.__setattr__(self, "theta_A", a)
        object.__setattr__(self, "theta_B", b)
        object.__setattr__(self, "rho_eq", rho)

    @property
    def dim(self) -> int:
        return self.rho_eq.shape[0]

    @property
    def population_A(self) -> float:
        """Equilibrium population of region A, ``Tr(rho_eq theta_A)``."""
        return float(np.trace(self.rho_eq @ self.theta_A).real)
