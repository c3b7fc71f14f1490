"""Dense finite-dimensional state algebra.

Gibbs states, fidelity and Bures geometry, the spectral seminorm, and a
step-discretized unitary propagator with partial trace.  Units follow
hbar = k_B = 1, so the Planckian time equals ``beta``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np

from .errors import DimError, InvalidOperator, ScheduleError

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-10
NEGATIVITY_ATOL = 1e-10
DEGENERACY_RTOL = 1e-10
DEFAULT_MAX_PHASE_STEP = 0.05


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_hermitian(a, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Validate ``a`` as a square Hermitian matrix and return it symmetrized."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidOperator(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidOperator("matrix has non-finite entries")
    err = np.max(np.abs(a - a.conj().T))
    if err > atol:
        raise InvalidOperator(f"matrix is not Hermitian (max deviation {err:.3g})")
    return 0.5 * (a + a.conj().T)


def as_density(rho) -> np.ndarray:
    """Validate ``rho`` as a density matrix (Hermitian, unit trace, PSD)."""
    rho = as_hermitian(rho)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_ATOL:
        raise InvalidOperator(f"trace is {tr!r}, expected 1")
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -NEGATIVITY_ATOL:
        raise InvalidOperator(f"matrix has negative eigenvalue {lam_min:.3g}")
    return rho


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimError(f"dimension mismatch: {a.shape} vs {b.shape}")


def hermitian_eig(a) -> Spectrum:
    """Eigendecomposition with ascending eigenvalues."""
    a = as_hermitian(a)
    w, v = np.linalg.eigh(a)
    return Spectrum(w, v)


def spectral_seminorm(a) -> float:
    """``lambda_max - lambda_min``; vanishes exactly on multiples of the identity."""
    w = np.linalg.eigvalsh(as_hermitian(a))
    return float(w[-1] - w[0])


def gibbs_populations(energies, beta: float) -> np.ndarray:
    """Boltzmann weights of an energy vector, shift-invariant and overflow-safe."""
    e = np.asarray(energies, dtype=float)
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta!r}")
    e = e - e.min()
    if np.isinf(beta):
        scale = max(1.0, float(np.max(np.abs(energies))))
        w = (e <= DEGENERACY_RTOL * scale).astype(float)
    else:
        w = np.exp(-beta * e)
    return w / w.sum()


def gibbs_state(h, beta: float) -> np.ndarray:
    """``exp(-beta H) / Z``.  ``beta = inf`` gives the uniform ground-space state."""
    w, v = hermitian_eig(h)
    p = gibbs_populations(w, beta)
    rho = (v * p) @ v.conj().T
    return 0.5 * (rho + rho.conj().T)


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    if w[0] < -NEGATIVITY_ATOL:
        raise InvalidOperator(f"state has negative eigenvalue {w[0]:.3g}")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def _uhlmann(rho, sigma) -> tuple[float, float]:
    """Root fidelity and Bures distance of a pair of states.

    The singular values of ``sqrt(rho) sqrt(sigma)`` are the square roots of
    the eigenvalues of ``sqrt(sigma) rho sqrt(sigma)``; taking them directly
    avoids a second square root of tiny eigenvalues.  The distance is the
    Frobenius norm of ``sqrt(rho) - sqrt(sigma) U`` at the optimal polar
    unitary, which keeps full relative precision for nearby states.
    """
    rho = as_hermitian(rho)
    sigma = as_hermitian(sigma)
    _check_same_dim(rho, sigma)
    a, b = _psd_sqrt(rho), _psd_sqrt(sigma)
    w, s, vh = np.linalg.svd(a @ b)
    u = vh.conj().T @ w.conj().T
    dist = np.linalg.norm(a - b @ u)
    return float(np.clip(s.sum(), 0.0, 1.0)), float(min(dist, np.sqrt(2.0)))


def sqrt_fidelity(rho, sigma) -> float:
    """Root fidelity ``Tr|sqrt(rho) sqrt(sigma)|``, clamped to [0, 1]."""
    return _uhlmann(rho, sigma)[0]


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(sigma) rho sqrt(sigma)))**2``."""
    return sqrt_fidelity(rho, sigma) ** 2


def bures_angle(rho, sigma) -> float:
    """``arccos(sqrt(F))`` in ``[0, pi/2]``."""
    return float(2.0 * np.arcsin(0.5 * _uhlmann(rho, sigma)[1]))


def bures_distance(rho, sigma) -> float:
    """``sqrt(2 (1 - sqrt(F)))`` in ``[0, sqrt(2)]``."""
    return _uhlmann(rho, sigma)[1]


def _psd_sqrt_batch(rhos: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rhos)
    return (v * np.sqrt(np.clip(w, 0.0, None))[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


def gibbs_states_batch(hs: np.ndarray, beta: float) -> np.ndarray:
    """Gibbs states for a stack of Hermitian matrices of shape ``(n, d, d)``."""
    w, v = np.linalg.eigh(hs)
    lw = -beta * (w - w[..., :1])
    p = np.exp(lw)
    p /= p.sum(axis=-1, keepdims=True)
    return (v * p[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


def bures_angle_batch(rhos: np.ndarray, sigmas: np.ndarray) -> np.ndarray:
    """Vectorized :func:`bures_angle` over stacks of states."""
    a, b = _psd_sqrt_batch(rhos), _psd_sqrt_batch(sigmas)
    w, _, vh = np.linalg.svd(a @ b)
    u = np.swapaxes(vh.conj(), -1, -2) @ np.swapaxes(w.conj(), -1, -2)
    dist = np.linalg.norm(a - b @ u, axis=(-2, -1))
    return 2.0 * np.arcsin(np.minimum(0.5 * dist, np.sqrt(0.5)))


def bures_angle_diagonal(p, q):
    """Bures angle between commuting states given their populations."""
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    q = np.clip(np.asarray(q, dtype=float), 0.0, None)
    if p.shape != q.shape:
        raise DimError(f"dimension mismatch: {p.shape} vs {q.shape}")
    dist = np.sqrt(np.sum((np.sqrt(p) - np.sqrt(q)) ** 2, axis=-1))
    return 2.0 * np.arcsin(np.minimum(0.5 * dist, np.sqrt(0.5)))


HamiltonianSpec = Union[np.ndarray, Callable[[float], np.ndarray]]


@dataclass(frozen=True)
class Schedule:
    """Piecewise time-dependent Hamiltonian ``t -> H(t)``.

    Each segment is ``(t_start, t_end, H)`` with ``H`` either a fixed matrix
    or a callable returning the matrix at time ``t``.
    """

    segments: tuple

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ScheduleError("schedule needs at least one segment")
        checked = []
        for k, (t0, t1, h) in enumerate(segs):
            if not t1 > t0:
                raise ScheduleError(f"segment {k} has t_end <= t_start")
            if k and not np.isclose(t0, checked[-1][1], rtol=0, atol=1e-12):
                raise ScheduleError(f"segment {k} is not contiguous with segment {k - 1}")
            if not callable(h):
                h = as_hermitian(h)
            checked.append((float(t0), float(t1), h))
        object.__setattr__(self, "segments", tuple(checked))

    @classmethod
    def constant(cls, h, duration: float, start: float = 0.0) -> "Schedule":
        return cls(((start, start + duration, h),))

    @classmethod
    def piecewise(cls, hamiltonians: Sequence, times: Sequence[float]) -> "Schedule":
        """Segments ``[times[k], times[k+1])`` carrying ``hamiltonians[k]``."""
        if len(times) != len(hamiltonians) + 1:
            raise ScheduleError("need one more time than Hamiltonians")
        return cls(tuple((times[k], times[k + 1], h) for k, h in enumerate(hamiltonians)))

    @property
    def start(self) -> float:
        return self.segments[0][0]

    @property
    def end(self) -> float:
        return self.segments[-1][1]

    @property
    def dim(self) -> int:
        return self._evaluate(self.segments[0], self.start).shape[0]

    @staticmethod
    def _evaluate(segment, t: float) -> np.ndarray:
        h = segment[2]
        return as_hermitian(h(t)) if callable(h) else h

    def hamiltonian_at(self, t: float) -> np.ndarray:
        if not self.start <= t <= self.end:
            raise ScheduleError(f"t={t} outside schedule [{self.start}, {self.end}]")
        for seg in self.segments:
            if t < seg[1]:
                return self._evaluate(seg, t)
        return self._evaluate(self.segments[-1], t)

    def max_seminorm(self, samples: int = 5) -> float:
        """Largest spectral seminorm seen at a few sample points per segment."""
        best = 0.0
        for seg in self.segments:
            ts = np.linspace(seg[0], seg[1], samples) if callable(seg[2]) else [seg[0]]
            for t in ts:
                best = max(best, spectral_seminorm(self._evaluate(seg, t)))
        return best


def _step_unitary(h: np.ndarray, dt: float) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    # the mean eigenvalue only contributes a global phase
    w = w - w.mean()
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def default_steps(sched: Schedule, t: float) -> int:
    span = t - sched.start
    return max(1, int(np.ceil(sched.max_seminorm() * span / DEFAULT_MAX_PHASE_STEP)))


def propagator(sched: Schedule, t: float, steps: int | None = None) -> np.ndarray:
    """Midpoint-rule time-ordered exponential from ``sched.start`` to ``t``."""
    if not sched.start <= t <= sched.end + 1e-12:
        raise ScheduleError(f"t={t} outside schedule [{sched.start}, {sched.end}]")
    if steps is None:
        steps = default_steps(sched, t)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    span = t - sched.start
    u = np.eye(sched.dim, dtype=complex)
    if span <= 0:
        return u
    for seg in sched.segments:
        t0, t1 = seg[0], min(seg[1], t)
        if t1 <= t0:
            break
        n = max(1, int(round(steps * (t1 - t0) / span)))
        dt = (t1 - t0) / n
        if callable(seg[2]):
            for k in range(n):
                u = _step_unitary(Schedule._evaluate(seg, t0 + (k + 0.5) * dt), dt) @ u
        else:
            u = np.linalg.matrix_power(_step_unitary(seg[2], dt), n) @ u
    return u


def propagate(rho0, sched: Schedule, t: float, steps: int | None = None) -> np.ndarray:
    """Evolve ``rho0`` under ``sched`` up to time ``t`` as ``U rho0 U^dagger``."""
    rho0 = as_density(rho0)
    u = propagator(sched, t, steps)
    if u.shape != rho0.shape:
        raise DimError(f"state dim {rho0.shape} does not match schedule dim {u.shape}")
    rho = u @ rho0 @ u.conj().T
    return 0.5 * (rho + rho.conj().T)


_KEEP = {"S": 0, "s": 0, 0: 0, "M": 1, "m": 1, 1: 1}


def partial_trace(rho_sm, dims: tuple[int, int], keep="S") -> np.ndarray:
    """Reduce a bipartite state on ``d_S * d_M`` to subsystem ``keep`` ('S' or 'M')."""
    rho_sm = np.asarray(rho_sm, dtype=complex)
    d_s, d_m = (int(d) for d in dims)
    if rho_sm.shape != (d_s * d_m, d_s * d_m):
        raise DimError(f"state of shape {rho_sm.shape} does not factor as {d_s}x{d_m}")
    if keep not in _KEEP:
        raise ValueError(f"keep must be 'S' or 'M', got {keep!r}")
    r = rho_sm.reshape(d_s, d_m, d_s, d_m)
    if _KEEP[keep] == 0:
        return np.einsum("ikjk->ij", r)
    return np.einsum("kikj->ij", r)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-induced random density matrix of the given rank (full by default)."""
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return 0.5 * (rho + rho.conj().T)


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (g + g.conj().T)


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    return random_density(dim, rng, rank=1)
