"""Concrete systems: the dephased spin-1/2 benchmark and the 1D Caldeira-Leggett grid model."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .lindblad import LindbladModel
from .operators import SIGMA_Y, SIGMA_Z, dag, validate_density
from .problem import TransitionSetup


# --------------------------------------------------------------------------
# spin-1/2


@dataclass(frozen=True)
class SpinHalfParams:
    mu: float = 0.1
    gamma: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("mu", "gamma", "hbar"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def metastable(self) -> bool:
        """True when 2 mu < gamma, i.e. the rate ``omega`` is real."""
        return 2 * self.mu < self.gamma


def spin_half_model(params: SpinHalfParams) -> tuple[LindbladModel, TransitionSetup]:
    model = LindbladModel(
        hamiltonian=params.mu * SIGMA_Y,
        lindblads=(np.sqrt(params.gamma) * SIGMA_Z,),
        hbar=params.hbar,
    )
    setup = TransitionSetup(
        theta_A=np.diag([1.0, 0.0]).astype(complex),
        theta_B=np.diag([0.0, 1.0]).astype(complex),
        rho_eq=np.eye(2, dtype=complex) / 2,
    )
    return model, setup


class SpinHalfAnalytic(NamedTuple):
    C: float
    Cdot: float
    c_x: float
    c_z: float
    metastable: bool


def spin_half_analytic(params: SpinHalfParams, t: float) -> SpinHalfAnalytic:
    """Closed-form correlation, rate and Pauli coefficients of ``theta_B(t)``.

    Below the metastability threshold (gamma <= 2 mu) ``omega`` is imaginary
    and cosh/sinh are continued to cos/sin of ``|omega| t``; at the threshold
    the ``omega -> 0`` limit is used.
    """
    mu, g, hbar = params.mu, params.gamma, params.hbar
    w2 = (g * g - 4 * mu * mu) / hbar**2
    rate = g / hbar
    decay = np.exp(-rate * t)
    if w2 > 0:
        w = np.sqrt(w2)
        ch, sh_over_w = np.cosh(w * t), np.sinh(w * t) / w
    elif w2 < 0:
        w = np.sqrt(-w2)
        ch, sh_over_w = np.cos(w * t), np.sin(w * t) / w
    else:
        ch, sh_over_w = 1.0, t
    c_x = decay * mu / hbar * sh_over_w
    c_z = -0.5 * decay * (ch + rate * sh_over_w)
    C = 0.5 * (1 - decay * (ch + rate * sh_over_w))
    Cdot = 2 * mu * mu / hbar**2 * decay * sh_over_w
    return SpinHalfAnalytic(float(C), float(Cdot), float(c_x), float(c_z), w2 > 0)


def spin_half_rate_peak_time(params: SpinHalfParams) -> float:
    """Time of the maximum of the analytic rate, ``artanh(hbar omega / gamma) / omega``."""
    if not params.metastable:
        raise ValueError("rate maximum formula needs the metastable regime 2 mu < gamma")
    w = np.sqrt(params.gamma**2 - 4 * params.mu**2) / params.hbar
    return float(np.arctanh(params.hbar * w / params.gamma) / w)


# --------------------------------------------------------------------------
# Caldeira-Leggett on a position grid


@dataclass(frozen=True, eq=False)
class Grid1D:
    n: int
    hbar: float
    points: np.ndarray
    delta_x: float
    delta_p: float
    momenta: np.ndarray
    fourier: np.ndarray
    position_op: np.ndarray
    momentum_op: np.ndarray

    @property
    def dim(self) -> int:
        return 2**self.n


def build_grid_1d(n: int, hbar: float) -> Grid1D:
    """Position grid ``x_k = k / 2^n`` on ``[0, 1 - 2^-n]`` and its conjugate momentum.

    Column ``k`` of ``fourier`` is the plane wave with momentum ``p_k`` in the
    position basis, so ``P = U diag(p) U^dag``.
    """
    if int(n) != n or not 2 <= n <= 7:
        raise ValueError(f"n must be an integer in [2, 7], got {n}")
    if not hbar > 0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    n = int(n)
    size = 2**n
    k = np.arange(size)
    points = k / size
    delta_x = 1.0 / size
    delta_p = 2 * np.pi * hbar
    momenta = (-(size // 2) + k) * delta_p
    fourier = np.exp(1j * np.outer(points, momenta) / hbar) / np.sqrt(size)
    x_op = np.diag(points).astype(complex)
    p_op = (fourier * momenta) @ dag(fourier)
    p_op = (p_op + dag(p_op)) / 2
    return Grid1D(n, hbar, points, delta_x, delta_p, momenta, fourier, x_op, p_op)


def double_well(x):
    return 20.0 * (x - 0.2) ** 2 * (x - 0.8) ** 2


def double_well_potential(grid: Grid1D, v: Callable = double_well) -> np.ndarray:
    """Diagonal potential operator on the grid; the default is the symmetric double well."""
    return np.diag(v(grid.points)).astype(complex)


@dataclass(frozen=True)
class CLParams:
    mass: float = 1.0
    kT: float = 0.0162
    gamma: float = 0.1
    hbar: float = 0.01

    def __post_init__(self):
        if not (self.mass > 0 and self.kT > 0 and self.hbar > 0):
            raise ValueError("mass, kT and hbar must be positive")
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")

    @property
    def thermal_length(self) -> float:
        return float(np.sqrt(self.hbar / (4 * self.mass * self.kT)))


def bare_hamiltonian(grid: Grid1D, params: CLParams, v: np.ndarray) -> np.ndarray:
    p = grid.momentum_op
    return p @ p / (2 * params.mass) + v


def caldeira_leggett_model(grid: Grid1D, params: CLParams, v: np.ndarray) -> LindbladModel:
    """Positivity-corrected Caldeira-Leggett dynamics in Lindblad form.

    ``H = P^2/2m + V + (gamma/2)(XP + PX)`` and a single jump operator
    ``L = sqrt(gamma) (X / lambda_T + i lambda_T P)``. With ``gamma = 0`` the
    jump list is empty.
    """
    if v.shape != (grid.dim, grid.dim):
        raise ValueError(f"potential shape {v.shape} does not match grid dimension {grid.dim}")
    if not np.isclose(params.hbar, grid.hbar):
        raise ValueError(f"grid built with hbar={grid.hbar}, params have hbar={params.hbar}")
    x, p = grid.position_op, grid.momentum_op
    h = bare_hamiltonian(grid, params, v) + 0.5 * params.gamma * (x @ p + p @ x)
    h = (h + dag(h)) / 2
    if params.gamma == 0:
        return LindbladModel(h, (), params.hbar)
    lam = params.thermal_length
    l = np.sqrt(params.gamma) * (x / lam + 1j * lam * p)
    return LindbladModel(h, (l,), params.hbar)


def gibbs_state(grid: Grid1D, v: np.ndarray, params: CLParams) -> np.ndarray:
    """Thermal state of the bare Hamiltonian ``P^2/2m + V``."""
    h0 = bare_hamiltonian(grid, params, v)
    w, vecs = np.linalg.eigh((h0 + dag(h0)) / 2)
    pops = np.exp(-(w - w[0]) / params.kT)
    pops /= pops.sum()
    rho = (vecs * pops) @ dag(vecs)
    return validate_density((rho + dag(rho)) / 2)


def region_projector(grid: Grid1D, lo: float, hi: float) -> np.ndarray:
    """Diagonal projector onto grid points with ``lo <= x_k <= hi``."""
    if not 0 <= lo <= hi <= 1:
        raise ValueError(f"need 0 <= lo <= hi <= 1, got lo={lo}, hi={hi}")
    eps = 1e-12
    mask = (grid.points >= lo - eps) & (grid.points <= hi + eps)
    return np.diag(mask.astype(float)).astype(complex)


def cl_setup(grid: Grid1D, params: CLParams, v: np.ndarray,
             region_a=(0.125, 0.25), region_b=(0.75, 0.875)) -> TransitionSetup:
    return TransitionSetup(
        theta_A=region_projector(grid, *region_a),
        theta_B=region_projector(grid, *region_b),
        rho_eq=gibbs_state(grid, v, params),
    )


def lindblad_fixed_point(model: LindbladModel) -> np.ndarray:
    """Stationary state of the generator (null vector of the superoperator).

    Diagnostic alternative to the Gibbs state for the equilibrium average.
    """
    from .lindblad import unvec

    sup = model.superoperator
    w, v = np.linalg.eig(sup)
    idx = int(np.argmin(np.abs(w)))
    rho = unvec(v[:, idx], model.dim)
    rho = rho / np.trace(rho)
    return (rho + dag(rho)) / 2
