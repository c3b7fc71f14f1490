"""Machines that saturate the bound for two Hamiltonians.

The discrimination machine rotates an equal superposition of the extreme
eigenvectors of ``kappa = H2 - H1``; an isometry then maps the two outputs to
Uhlmann-optimal purifications of the two Gibbs states.  The machine is
tracked by its overlaps and times, not by an explicit unitary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateTask, NotAThermalizer
from .quantum import as_hermitian, bures_angle, fidelity, gibbs_state, hermitian_eig

SEMINORM_ATOL = 1e-12


@dataclass(frozen=True)
class TwoPointTask:
    h1: np.ndarray
    h2: np.ndarray
    beta: float
    kappa: np.ndarray = field(init=False, repr=False)
    lambda_up: float = field(init=False)
    lambda_down: float = field(init=False)

    def __post_init__(self):
        h1, h2 = as_hermitian(self.h1), as_hermitian(self.h2)
        if h1.shape != h2.shape:
            raise ValueError("Hamiltonians must have equal dimension")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        kappa = h2 - h1
        w = np.linalg.eigvalsh(kappa)
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "h2", h2)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "lambda_up", float(w[-1]))
        object.__setattr__(self, "lambda_down", float(w[0]))

    @property
    def norm(self) -> float:
        return self.lambda_up - self.lambda_down

    def gibbs_pair(self):
        return gibbs_state(self.h1, self.beta), gibbs_state(self.h2, self.beta)

    def probe_state(self) -> np.ndarray:
        """``(|up> + |down>)/sqrt(2)`` on the extreme eigenvectors of kappa."""
        _, v = hermitian_eig(self.kappa)
        return (v[:, -1] + v[:, 0]) / math.sqrt(2.0)


def discrimination_overlap(task: TwoPointTask, tau: float) -> float:
    """``|<psi_1(tau)|psi_2(tau)>|**2 = cos(||kappa|| tau / 2)**2``."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    return math.cos(0.5 * task.norm * tau) ** 2


def discrimination_time(task: TwoPointTask) -> float:
    """Time after which the two Hamiltonians are perfectly distinguishable."""
    if task.norm <= SEMINORM_ATOL:
        raise DegenerateTask("kappa is proportional to the identity")
    return math.pi / task.norm


def optimal_two_point_time(task: TwoPointTask) -> float:
    """``2 D(omega_1, omega_2) / ||kappa||``, the bound met with equality at eps = 0."""
    if task.norm <= SEMINORM_ATOL:
        raise DegenerateTask("kappa is proportional to the identity")
    rho, sigma = task.gibbs_pair()
    d = bures_angle(rho, sigma)
    if d == 0.0:
        raise DegenerateTask("the two Gibbs states coincide")
    return 2.0 * d / task.norm


def simulate_discrimination(task: TwoPointTask, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Evolve the probe state under ``H_i - H_1`` for time ``tau``; returns both vectors."""
    psi = task.probe_state()
    w, v = hermitian_eig(task.kappa)
    psi2 = v @ (np.exp(-1j * w * tau) * (v.conj().T @ psi))
    return psi, psi2


def uhlmann_target_overlap(task: TwoPointTask) -> float:
    """Squared purification overlap the final isometry must realize, i.e. ``F``."""
    rho, sigma = task.gibbs_pair()
    return fidelity(rho, sigma)


def _sqrt_purification(rho: np.ndarray) -> np.ndarray:
    """``(sqrt(rho) x 1) sum_i |i>|i>`` flattened to a ``d*d`` vector."""
    w, v = np.linalg.eigh(rho)
    amp = v * np.sqrt(np.clip(w, 0.0, None))
    return np.einsum("ik,jk->ij", amp, v.conj()).reshape(-1)


def _qubit_unitary(theta: float, phi: float, chi: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array(
        [[c * np.exp(1j * phi), -s * np.exp(1j * chi)],
         [s * np.exp(-1j * chi), c * np.exp(-1j * phi)]]
    )


def qubit_purification_overlap(task: TwoPointTask, n_grid: int = 24) -> float:
    """Best purification overlap found by searching machine-side qubit unitaries.

    Purifications ``|Psi> = (sqrt(rho) x 1) |Omega>`` and ``(sqrt(sigma) x W)
    |Omega>`` with ``|Omega> = sum_i |i>|i>``; the squared overlap is
    maximized over ``W`` (grid plus local polish).
    """
    if task.h1.shape != (2, 2):
        raise ValueError("explicit purification check is implemented for qubits")
    rho, sigma = task.gibbs_pair()
    psi_rho = _sqrt_purification(rho)
    base = _sqrt_purification(sigma).reshape(2, 2)

    def overlap(params):
        w = _qubit_unitary(*params)
        psi_sigma = (base @ w.T).reshape(-1)
        return abs(np.vdot(psi_rho, psi_sigma)) ** 2

    grid = np.linspace(0.0, math.pi, n_grid, endpoint=False)
    best = max(
        ((th, ph, ch) for th in grid for ph in grid for ch in grid[:: max(1, n_grid // 6)]),
        key=overlap,
    )
    res = minimize(lambda x: -overlap(x), np.array(best), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
    return max(overlap(best), -res.fun)


def swap_machine_time(target_count: int) -> float:
    """Preparation time of a collisional swap machine.

    Zero for a single known target (state preparation); a fixed-state device
    cannot thermalize several Hamiltonians.
    """
    if target_count < 1:
        raise ValueError("target_count must be >= 1")
    if target_count > 1:
        raise NotAThermalizer("a swap machine prepares one fixed state; it does not thermalize")
    return 0.0
