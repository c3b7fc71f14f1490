"""The thermalization-time factor chi and its bounds.

A machine that outputs epsilon-accurate Gibbs states for every Hamiltonian
in a ball of radius ``delta`` needs at least ``tau_Pl * chi(H_bar, delta,
epsilon)``, where chi maximizes ``(2 D(omega_1, omega_2) - 4 eps) /
(beta ||H_1 - H_2||)`` over pairs in the ball.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any

import numpy as np

from .errors import DegeneratePair, UnsupportedDimension
from .quantum import (
    as_hermitian,
    bures_angle,
    bures_angle_batch,
    bures_angle_diagonal,
    gibbs_populations,
    gibbs_state,
    gibbs_states_batch,
    hermitian_eig,
    random_hermitian,
    spectral_seminorm,
)

EPS_MAX = math.pi / 4
DELTA_MIN = 1e-3
DELTA_MAX = 50.0
GRID_ALPHA = 21
GRID_DELTA = 40
GOLDEN_TOL = 1e-6
SEMINORM_ATOL = 1e-12


def eps_to_radians(eps: float, units: str = "rad") -> float:
    """Convert an error tolerance given in radians or in units of ``EPS_MAX``."""
    if units in ("rad", "radians"):
        return float(eps)
    if units in ("max", "eps_max"):
        return float(eps) * EPS_MAX
    raise ValueError(f"unknown epsilon units {units!r}")


@dataclass(frozen=True)
class BoundQuery:
    h_bar: np.ndarray
    beta: float
    delta: float
    epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "h_bar", as_hermitian(self.h_bar))
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not 0.0 <= self.epsilon <= math.pi / 2:
            raise ValueError("epsilon must lie in [0, pi/2]")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    @classmethod
    def from_eps_max_units(cls, h_bar, beta, delta, eps_fraction) -> "BoundQuery":
        return cls(h_bar, beta, delta, eps_to_radians(eps_fraction, "max"))

    @property
    def epsilon_max_units(self) -> float:
        return self.epsilon / EPS_MAX


@dataclass
class ChiBoundResult:
    """A value of chi together with the parameters or pair attaining it.

    ``kind`` is one of ``lower-ansatz``, ``lower-exact-pair``, ``upper``,
    ``exact-bruteforce``.
    """

    value: float
    kind: str
    witness: dict[str, Any] = field(default_factory=dict)


def _pair_seminorm(h1, h2) -> float:
    norm = spectral_seminorm(h1 - h2)
    scale = max(1.0, spectral_seminorm(h1), spectral_seminorm(h2))
    if norm <= SEMINORM_ATOL * scale:
        raise DegeneratePair("Hamiltonians differ by a multiple of the identity")
    return norm


def pairwise_chi(h1, h2, beta: float, epsilon: float) -> float:
    """``(2 D(omega_1, omega_2) - 4 eps) / (beta ||H1 - H2||)``; negative means trivial."""
    h1, h2 = as_hermitian(h1), as_hermitian(h2)
    norm = _pair_seminorm(h1, h2)
    d = bures_angle(gibbs_state(h1, beta), gibbs_state(h2, beta))
    return (2.0 * d - 4.0 * epsilon) / (beta * norm)


def ansatz_angle(p_star, alpha, delta):
    """Bures angle between the two-level shifted Gibbs states (beta = 1 units).

    Written as ``atan2(sqrt(B1 B2 - A**2), A)`` with the difference under the
    root simplified analytically, so it stays accurate as delta -> 0.
    """
    p = np.asarray(p_star, dtype=float)
    a = np.asarray(alpha, dtype=float)
    d = np.asarray(delta, dtype=float)
    num = p + (1.0 - p) * np.exp((1.0 - 2.0 * a) * d / 2.0)
    gap = 2.0 * np.sqrt(p * (1.0 - p)) * np.exp((1.0 - 2.0 * a) * d / 4.0) * np.sinh(d / 4.0)
    return np.arctan2(gap, num)


def chi_lower_ansatz(p_star, alpha, delta, epsilon):
    """Finite-error lower bound from ``H1 = H + alpha k``, ``H2 = H - (1 - alpha) k``.

    ``k`` shifts a block of Gibbs weight ``1 - p_star`` by ``delta`` (in units
    of ``1/beta``).  Vectorized over all arguments.
    """
    return (2.0 * ansatz_angle(p_star, alpha, delta) - 4.0 * np.asarray(epsilon)) / np.asarray(delta)


def _ansatz_scalar(p: float, a: float, d: float, eps: float) -> float:
    num = p + (1.0 - p) * math.exp((1.0 - 2.0 * a) * d / 2.0)
    gap = 2.0 * math.sqrt(p * (1.0 - p)) * math.exp((1.0 - 2.0 * a) * d / 4.0) * math.sinh(d / 4.0)
    return (2.0 * math.atan2(gap, num) - 4.0 * eps) / d


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f, lo: float, hi: float, tol: float = GOLDEN_TOL) -> tuple[float, float]:
    """Golden-section maximization of a unimodal ``f`` on ``[lo, hi]``.

    Endpoints are compared at the end so boundary optima are not lost.
    """
    a, b = lo, hi
    c, d = b - _INVPHI * (b - a), a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    candidates = [(fc, c), (fd, d), (f(lo), lo), (f(hi), hi)]
    best = max(candidates, key=lambda t: t[0])
    return best[1], best[0]


def chi_lower_optimized(
    p_star: float,
    epsilon: float,
    delta_max: float = DELTA_MAX,
    delta_min: float = DELTA_MIN,
    max_sweeps: int = 60,
) -> ChiBoundResult:
    """Maximize :func:`chi_lower_ansatz` over ``alpha in [0, 1]`` and ``delta``.

    A 21 x 40 multistart grid (log-spaced delta) seeds coordinate-wise
    golden-section refinement; ties go to the smaller delta.
    """
    if not 0.0 < p_star < 1.0:
        raise ValueError("p_star must lie in (0, 1)")
    if not 0.0 <= epsilon <= math.pi / 2:
        raise ValueError("epsilon must lie in [0, pi/2]")
    alphas = np.linspace(0.0, 1.0, GRID_ALPHA)
    log_deltas = np.linspace(math.log(delta_min), math.log(delta_max), GRID_DELTA)
    grid = chi_lower_ansatz(p_star, alphas[None, :], np.exp(log_deltas)[:, None], epsilon)
    i_d, i_a = np.unravel_index(int(np.argmax(grid)), grid.shape)
    alpha, log_d = float(alphas[i_a]), float(log_deltas[i_d])
    best = float(grid[i_d, i_a])

    step_a = alphas[1] - alphas[0]
    step_d = log_deltas[1] - log_deltas[0]
    lo_d, hi_d = log_deltas[0], log_deltas[-1]
    for _ in range(max_sweeps):
        previous = best
        alpha, best = golden_max(
            lambda a: _ansatz_scalar(p_star, a, math.exp(log_d), epsilon),
            max(0.0, alpha - step_a), min(1.0, alpha + step_a),
        )
        log_d, best = golden_max(
            lambda x: _ansatz_scalar(p_star, alpha, math.exp(x), epsilon),
            max(lo_d, log_d - step_d), min(hi_d, log_d + step_d),
        )
        if best - previous <= 1e-13:
            break
    return ChiBoundResult(
        value=best,
        kind="lower-ansatz",
        witness={"alpha": alpha, "delta": math.exp(log_d), "p_star": p_star, "epsilon": epsilon},
    )


def chi_upper(delta: float, epsilon: float, beta: float = 1.0) -> float:
    """``1/2 - 4 eps / (beta delta)``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    return 0.5 - 4.0 * epsilon / (beta * delta)


def _unit_directions(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    out = np.empty((count, dim, dim), dtype=complex)
    for k in range(count):
        h = random_hermitian(dim, rng)
        out[k] = h / spectral_seminorm(h)
    return out


def chi_exact_bruteforce(
    query: BoundQuery,
    n_directions: int = 400,
    n_alpha: int = 5,
    n_shells: int = 6,
    seed: int = 0,
    directions: str = "all",
    max_pairs: int = 1_000_000,
) -> ChiBoundResult:
    """Sampled maximum of :func:`pairwise_chi` over Hamiltonian pairs in the ball.

    Candidates are (i) diagonal two-level shifts of every block of the
    eigenbasis of ``H_bar`` and (ii) random Hermitian directions, both as
    ``(H + alpha s k, H - (1 - alpha) s k)`` over geometric shells of ``s``,
    plus (iii) pairs of independent random points in the ball.  The result
    is a certified lower bound on the true maximum.  ``directions`` selects
    ``"all"``, ``"diagonal"`` or ``"random"`` candidates.
    """
    h_bar, beta, delta, eps = query.h_bar, query.beta, query.delta, query.epsilon
    dim = h_bar.shape[0]
    if dim > 3:
        raise UnsupportedDimension("brute-force oracle supports dimension <= 3")
    rng = np.random.default_rng(seed)
    alphas = np.linspace(0.0, 1.0, n_alpha)
    shells = np.geomspace(1e-3, 1.0, n_shells)
    energies, vecs = hermitian_eig(h_bar)
    pops = gibbs_populations(energies, beta)
    best = ChiBoundResult(-math.inf, "exact-bruteforce")

    def consider(value, witness):
        nonlocal best
        if value > best.value:
            best = ChiBoundResult(float(value), "exact-bruteforce", witness)

    n_pairs = 0
    if directions in ("all", "diagonal") and dim > 1:
        for r in range(1, dim):
            for block in combinations(range(dim), r):
                mask = np.zeros(dim)
                mask[list(block)] = 1.0
                p_star = float(pops[mask == 0].sum())
                for a in alphas:
                    reach = delta / max(a, 1.0 - a)
                    s = shells * reach
                    e1 = beta * (energies[None, :] + a * s[:, None] * mask)
                    e2 = beta * (energies[None, :] - (1.0 - a) * s[:, None] * mask)
                    p1 = np.exp(-(e1 - e1.min(axis=1, keepdims=True)))
                    p2 = np.exp(-(e2 - e2.min(axis=1, keepdims=True)))
                    p1 /= p1.sum(axis=1, keepdims=True)
                    p2 /= p2.sum(axis=1, keepdims=True)
                    vals = (2.0 * bures_angle_diagonal(p1, p2) - 4.0 * eps) / (beta * s)
                    n_pairs += s.size
                    k = int(np.argmax(vals))
                    kappa = vecs @ np.diag(s[k] * mask) @ vecs.conj().T
                    consider(vals[k], {
                        "h1": h_bar + a * kappa,
                        "h2": h_bar - (1.0 - a) * kappa,
                        "p_star": p_star,
                        "alpha": float(a),
                        "delta_used": float(beta * s[k]),
                        "block": block,
                        "diagonal": True,
                    })

    if directions in ("all", "random"):
        dirs = _unit_directions(dim, n_directions, rng)
        h1s, h2s = [], []
        for a in alphas:
            s = shells * delta / max(a, 1.0 - a)
            h1s.append(h_bar + a * s[None, :, None, None] * dirs[:, None])
            h2s.append(h_bar - (1.0 - a) * s[None, :, None, None] * dirs[:, None])
        # independent points: radius on the same shells, directions reshuffled
        other = dirs[rng.permutation(n_directions)]
        for s1 in shells:
            h2 = h_bar + delta * shells[None, :, None, None] * other[:, None]
            h1s.append(np.broadcast_to((h_bar + delta * s1 * dirs)[:, None], h2.shape))
            h2s.append(h2)
        h1 = np.concatenate([x.reshape(-1, dim, dim) for x in h1s])
        h2 = np.concatenate([x.reshape(-1, dim, dim) for x in h2s])
        n_pairs += h1.shape[0]
        if n_pairs > max_pairs:
            raise ValueError(f"{n_pairs} candidate pairs exceed the limit {max_pairs}")
        diff = np.linalg.eigvalsh(h1 - h2)
        norms = diff[:, -1] - diff[:, 0]
        ok = norms > SEMINORM_ATOL
        h1, h2, norms = h1[ok], h2[ok], norms[ok]
        vals = np.empty(h1.shape[0])
        for start in range(0, h1.shape[0], 20000):
            sl = slice(start, start + 20000)
            d = bures_angle_batch(gibbs_states_batch(h1[sl], beta), gibbs_states_batch(h2[sl], beta))
            vals[sl] = (2.0 * d - 4.0 * eps) / (beta * norms[sl])
        k = int(np.argmax(vals))
        consider(vals[k], {"h1": h1[k], "h2": h2[k], "diagonal": False})

    best.witness["n_pairs"] = n_pairs
    return best


def speed_limit_rhs(t, h1, h2, beta: float):
    """Threshold ``D(omega_1, omega_2)/2 - (t / 4 tau_Pl) beta ||H1 - H2||``.

    At any time ``t``, at least one of two evolutions from a common initial
    state must stay at least this far (Bures angle) from its Gibbs target.
    """
    h1, h2 = as_hermitian(h1), as_hermitian(h2)
    norm = _pair_seminorm(h1, h2)
    d = bures_angle(gibbs_state(h1, beta), gibbs_state(h2, beta))
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    rhs = 0.5 * d - t / (4.0 * beta) * beta * norm
    return float(rhs) if rhs.ndim == 0 else rhs


def intro_regime_bound(beta: float, gap: float, p0: float) -> float:
    """Lower bound on tau in the two temperature regimes (natural units).

    ``tau_Pl sqrt(e)/(1 + e)`` when ``beta gap <= 1``, else ``(2 p0 - 1)/gap``.
    """
    if not gap > 0:
        raise ValueError("gap must be positive")
    if beta * gap <= 1.0:
        return beta * math.sqrt(math.e) / (1.0 + math.e)
    if not 0.5 <= p0 <= 1.0:
        raise ValueError("ground population must lie in [1/2, 1]")
    return (2.0 * p0 - 1.0) / gap
