"""Quantum Fisher information of thermal states and locally-exact bounds.

All thermal quantities are adimensional: the exponent is ``X = beta * H``
and a perturbation direction ``V`` enters as ``X' = beta * V``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NumericalInstability, UnsupportedLimit
from .quantum import as_hermitian, bures_angle, hermitian_eig, spectral_seminorm

DEGENERATE_RTOL = 1e-9
FD_STEP = 1e-3
FD_RTOL = 1e-3
EXHAUSTIVE_MAX_DIM = 24


@dataclass(frozen=True)
class CoarseGraining:
    """Bipartition of Gibbs populations into a shifted block ``I1`` and the rest.

    ``p_star`` is the weight of the unshifted block, ``q0/(q0 + q1)``.
    ``optimal`` is False when the split came from the greedy fallback.
    """

    index_set: tuple
    p_star: float
    q0: float
    q1: float
    optimal: bool = True

    @classmethod
    def from_populations(cls, populations, index_set, optimal: bool = True) -> "CoarseGraining":
        p = np.asarray(populations, dtype=float)
        idx = tuple(sorted(int(i) for i in index_set))
        q1 = float(p[list(idx)].sum()) if idx else 0.0
        q0 = float(p.sum()) - q1
        return cls(idx, q0 / (q0 + q1), q0, q1, optimal)

    @property
    def variance(self) -> float:
        return self.p_star * (1.0 - self.p_star)


@dataclass(frozen=True)
class Perturbation:
    """Direction ``X'`` of a Hamiltonian perturbation with its cached seminorm."""

    direction: np.ndarray
    seminorm: float = field(init=False)

    def __post_init__(self):
        x = as_hermitian(self.direction)
        object.__setattr__(self, "direction", x)
        norm = spectral_seminorm(x)
        if not norm > 0:
            raise ValueError("perturbation proportional to the identity has zero seminorm")
        object.__setattr__(self, "seminorm", norm)


def _direction(x) -> np.ndarray:
    return x.direction if isinstance(x, Perturbation) else as_hermitian(x)


def _seminorm(x) -> float:
    return x.seminorm if isinstance(x, Perturbation) else spectral_seminorm(x)


def _pair_weight(p_i, p_j, lnp_i, lnp_j):
    """``(p_i - p_j)**2 / (ln p_i - ln p_j)**2`` with its removable singularity."""
    p_max = np.maximum(np.asarray(p_i, float), np.asarray(p_j, float))
    dl = np.abs(np.asarray(lnp_i - lnp_j, dtype=float))
    # |p_i - p_j| = p_max * (1 - exp(-|dl|)), free of cancellation
    ratio = np.ones(np.broadcast(p_max, dl).shape)
    nd = dl > DEGENERATE_RTOL
    ratio[nd] = -np.expm1(-dl[nd]) / dl[nd]
    ratio[~nd] = 1.0 - 0.5 * dl[~nd]
    return (p_max * ratio) ** 2


def qfi_thermal(h, beta: float, perturbation) -> float:
    """QFI of ``theta -> omega(beta, H + theta V)`` at ``theta = 0``.

    Evaluated in the eigenbasis of ``H`` as the classical variance of the
    diagonal of ``beta V`` plus the coherent contribution
    ``sum_{i != j} |X'_ij|^2 2 (p_i - p_j)^2 / ((ln p_i - ln p_j)^2 (p_i + p_j))``.
    """
    if not math.isfinite(beta):
        raise UnsupportedLimit("thermal QFI formula needs finite beta; use qfi_finite_difference")
    if not beta > 0:
        raise ValueError("beta must be positive")
    energies, vecs = hermitian_eig(h)
    xp = beta * (vecs.conj().T @ _direction(perturbation) @ vecs)
    lnp = -beta * (energies - energies.min())
    lnp = lnp - np.logaddexp.reduce(lnp)
    p = np.exp(lnp)

    diag = xp.diagonal().real
    classical = float(p @ diag**2 - (p @ diag) ** 2)

    w = 2.0 * _pair_weight(p[:, None], p[None, :], lnp[:, None], lnp[None, :])
    w = w / (p[:, None] + p[None, :])
    off = np.abs(xp) ** 2
    np.fill_diagonal(off, 0.0)
    return max(0.0, classical + float(np.sum(off * w)))


def normalized_sqrt_qfi(h, beta: float, perturbation) -> float:
    """``sqrt(F) / (beta ||V||)``, the locally-exact bound for one direction."""
    return math.sqrt(qfi_thermal(h, beta, perturbation)) / (beta * _seminorm(perturbation))


def qfi_finite_difference(
    state_family: Callable[[float], np.ndarray], theta0: float = 0.0, h: float = FD_STEP
) -> float:
    """QFI from the Bures angle, ``4 D(rho_{t-h}, rho_{t+h})**2 / (2h)**2``.

    One Richardson step combines steps ``h`` and ``h/2``; the two raw
    estimates must agree to ``FD_RTOL`` relative.
    """

    def estimate(step):
        d = bures_angle(state_family(theta0 - step), state_family(theta0 + step))
        return (d / step) ** 2

    f_h, f_h2 = estimate(h), estimate(h / 2)
    scale = max(abs(f_h2), 1e-8)
    if abs(f_h - f_h2) > FD_RTOL * scale:
        raise NumericalInstability(
            f"finite-difference QFI not converged: {f_h:.6g} (h) vs {f_h2:.6g} (h/2)"
        )
    return max(0.0, (4.0 * f_h2 - f_h) / 3.0)


def _p_star(cg) -> float:
    return cg.p_star if isinstance(cg, CoarseGraining) else float(cg)


def chi_tilde_diagonal(populations=None, cg=None) -> float:
    """Diagonal bound ``sqrt(p*(1 - p*))``.

    ``cg`` may be a CoarseGraining or a bare ``p*``; when omitted the best
    bipartition of ``populations`` is used.
    """
    if cg is None:
        if populations is None:
            raise ValueError("need populations or a coarse graining")
        cg = best_bipartition(populations)
    p = _p_star(cg)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p_star must lie in [0, 1], got {p}")
    return math.sqrt(p * (1.0 - p))


def chi_tilde_coherent(populations, pairing: Sequence[tuple[int, int]]) -> float:
    """Coherent bound from ``X'_ij = 1/2`` on disjoint index pairs."""
    p = np.asarray(populations, dtype=float)
    used = [i for pair in pairing for i in pair]
    if len(used) != len(set(used)):
        raise ValueError("index pairs must be disjoint")
    total = 0.0
    for i, j in pairing:
        pi, pj = p[i], p[j]
        if pi <= 0 or pj <= 0:
            continue
        w = _pair_weight(pi, pj, math.log(pi), math.log(pj))
        total += float(w) / (pi + pj)
    return math.sqrt(total)


def qubit_transversal(p: float) -> float:
    """``(2p - 1)**2 / ln(p/(1-p))**2`` with the value 1/4 at p = 1/2."""
    return chi_tilde_coherent([p, 1.0 - p], [(0, 1)]) ** 2


def chi_tilde_qubit(p: float) -> float:
    """Exact locally-exact bound for a qubit with ground population ``p``.

    The objective is linear in ``sin(theta)**2``, so the optimum sits at an
    endpoint; the transversal endpoint always wins.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("qubit ground population must lie in (0, 1)")
    diagonal = p * (1.0 - p)
    transversal = qubit_transversal(p)
    assert transversal >= diagonal - 1e-15, (p, transversal, diagonal)
    return math.sqrt(transversal)


def chi_tilde_gapped(p0: float, dim: int) -> float:
    """Large-gap bound ``(2 p0 - 1) / ln((d - 1) p0 / (1 - p0))``, for ``p0 >= 1/2``."""
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    if not 0.5 <= p0 < 1.0:
        raise ValueError("ground population must lie in [1/2, 1)")
    if dim == 2:
        return math.sqrt(qubit_transversal(p0))
    return (2.0 * p0 - 1.0) / math.log((dim - 1) * p0 / (1.0 - p0))


def _subset_sums(p: np.ndarray) -> np.ndarray:
    sums = np.zeros(1)
    for x in p:
        sums = np.concatenate([sums, sums + x])
    return sums


def best_bipartition(populations, exhaustive_max_dim: int = EXHAUSTIVE_MAX_DIM) -> CoarseGraining:
    """Bipartition whose block weight is closest to 1/2.

    Exhaustive up to ``exhaustive_max_dim`` levels; above that a greedy
    largest-first split is returned with ``optimal=False``.
    """
    p = np.asarray(populations, dtype=float)
    d = p.size
    if d == 0:
        raise ValueError("empty population vector")
    if d == 1:
        return CoarseGraining.from_populations(p, ())
    if d <= exhaustive_max_dim:
        # the last level stays in the unshifted block; complements cover the rest
        sums = _subset_sums(p[:-1])
        k = int(np.argmin(np.abs(sums - 0.5 * p.sum())))
        idx = [i for i in range(d - 1) if (k >> i) & 1]
        return CoarseGraining.from_populations(p, idx)
    order = np.argsort(-p, kind="stable")
    total, target, idx = 0.0, 0.5 * p.sum(), []
    for i in order:
        if abs(total + p[i] - target) < abs(total - target):
            total += p[i]
            idx.append(int(i))
    return CoarseGraining.from_populations(p, idx, optimal=False)


def heisenberg_qfi_bound(tau: float, kappa) -> float:
    """Generalized Heisenberg limit ``||kappa||**2 tau**2`` (hbar = 1)."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    return _seminorm(kappa) ** 2 * tau**2


def heisenberg_angle_bound(tau: float, kappa) -> float:
    """Largest Bures angle two evolutions differing by ``kappa`` can reach in ``tau``."""
    return 0.5 * tau * _seminorm(kappa)


def k_separable_qfi_bound(t: float, k: int, n: int, h_norm: float) -> float:
    """``t**2 k**2 ceil(n/k) ||h||**2 / 4`` for states with at most k-partite entanglement."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    return t**2 * k**2 * math.ceil(n / k) * h_norm**2 / 4.0
