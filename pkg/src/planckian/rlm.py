"""Resonant-level model: a dot of energy ``E`` tunnel-coupled to a wide-band lead.

The dot occupation is

    p(t) = p0 e^{-G} + (1/2pi) int dOmega f(Omega) |A(Omega, t)|^2,
    A = e^{-G(t)/2} int_0^t g(s) e^{G(s)/2} e^{i (E - Omega) s} ds,

with ``G(t) = int_0^t g^2``.  Because ``|A|^2`` is even in ``E - Omega``,
``int_{-inf}^{E} |A|^2 / 2pi = (1 - e^{-G}) / 2`` and the Fermi factor can
be traded for ``f(Omega) - theta(E - Omega)``, which decays exponentially
on both sides.  The Omega integral is then taken over a finite window.

The decaying schedule ``g = sqrt(a / (t + b))`` is also available in the
time-domain kernel form ``sin(E u) / sinh(pi u / beta)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .bound import speed_limit_rhs
from .errors import BoundViolation, QuadratureError
from .quantum import bures_angle_diagonal
from .special import digamma_complex

PROB_ATOL = 1e-8
QUAD_TOL = 1e-6
VIOLATION_TOL = 1e-4
UNREACHABLE = math.inf

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(n: int):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _composite_nodes(breaks: np.ndarray, n: int):
    """Gauss-Legendre nodes/weights on every panel ``[breaks[i], breaks[i+1]]``."""
    x, w = _gauss_legendre(n)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.reshape(-1), weights.reshape(-1)


def _split(breaks: np.ndarray, times: int) -> np.ndarray:
    for _ in range(times):
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        breaks = np.insert(breaks, np.arange(1, breaks.size), mids)
    return breaks


def _subdivide(breaks, hmax: float) -> np.ndarray:
    """Insert points so no panel is wider than ``hmax``."""
    out = [breaks[0]]
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        k = max(1, int(math.ceil((hi - lo) / hmax - 1e-12)))
        out.extend(lo + (hi - lo) * np.arange(1, k + 1) / k)
    return np.asarray(out)


def _graded(origin: float, end: float, w0: float, wmax: float, growth: float = 1.5) -> np.ndarray:
    """Breakpoints from ``origin`` to ``end`` with widths growing geometrically to ``wmax``."""
    sign = 1.0 if end >= origin else -1.0
    length = abs(end - origin)
    pts, x, w = [0.0], 0.0, min(w0, wmax)
    while x + w < length:
        x += w
        pts.append(x)
        w = min(w * growth, wmax)
    pts.append(length)
    return origin + sign * np.asarray(pts)


def fermi_dirac(omega, beta: float):
    """``1 / (1 + exp(beta omega))``."""
    return expit(-beta * np.asarray(omega, dtype=float))


@dataclass(frozen=True)
class CouplingSchedule:
    """Tunnel coupling ``g(t)``; ``g = 0`` after ``cutoff``.

    ``constant``: ``g(t) = g``.  ``decaying``: ``g(t) = sqrt(a / (t + b))``.
    """

    kind: str
    g: float = 0.0
    a: float = 0.0
    b: float = 0.0
    cutoff: float = math.inf

    def __post_init__(self):
        if self.kind == "constant":
            if not self.g >= 0:
                raise ValueError("constant coupling needs g >= 0")
        elif self.kind == "decaying":
            if not (self.a > 0 and self.b > 0):
                raise ValueError("decaying coupling needs a > 0 and b > 0")
        else:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if not self.cutoff > 0:
            raise ValueError("cutoff must be positive")

    @classmethod
    def constant(cls, g: float, cutoff: float = math.inf) -> "CouplingSchedule":
        return cls("constant", g=g, cutoff=cutoff)

    @classmethod
    def decaying(cls, a: float, b: float, cutoff: float = math.inf) -> "CouplingSchedule":
        return cls("decaying", a=a, b=b, cutoff=cutoff)

    def coupling(self, t):
        t = np.asarray(t, dtype=float)
        on = t < self.cutoff
        if self.kind == "constant":
            return np.where(on, self.g, 0.0)
        return np.where(on, np.sqrt(self.a / (t + self.b)), 0.0)

    def integrated(self, t):
        """``G(t) = int_0^t g(s)^2 ds``."""
        t = np.minimum(np.asarray(t, dtype=float), self.cutoff)
        if self.kind == "constant":
            return self.g**2 * t
        return self.a * np.log1p(t / self.b)

    def amplitude(self, s):
        """``g(s) exp(G(s) / 2)`` for ``s`` below the cutoff."""
        s = np.asarray(s, dtype=float)
        if self.kind == "constant":
            return self.g * np.exp(0.5 * self.g**2 * s)
        return math.sqrt(self.a) * (s + self.b) ** (0.5 * (self.a - 1.0)) * self.b ** (-0.5 * self.a)

    @property
    def rate(self) -> float:
        """Lorentzian half-width ``g^2 / 2`` (constant schedules only)."""
        return 0.5 * self.g**2 if self.kind == "constant" else 0.0


@dataclass(frozen=True)
class Quadrature:
    """Node counts and Omega window (in units of ``1/beta``)."""

    nodes: int = 16
    window: float = 40.0
    tol: float = QUAD_TOL
    max_refinements: int = 4


@dataclass(frozen=True)
class RlmConfig:
    """Dot energy, temperature, initial occupation and coupling schedule.

    Initial states are diagonal in the occupation basis.
    """

    E_S: float
    beta: float
    p0: float
    schedule: CouplingSchedule
    quadrature: Quadrature = field(default_factory=Quadrature)

    def __post_init__(self):
        if not self.beta > 0 or not math.isfinite(self.beta):
            raise ValueError("beta must be positive and finite")
        if not 0.0 <= self.p0 <= 1.0:
            raise ValueError("p0 must lie in [0, 1]")

    @property
    def q_thermal(self) -> float:
        return float(fermi_dirac(self.E_S, self.beta))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    p: np.ndarray
    D_to_thermal: np.ndarray

    def __post_init__(self):
        if not (len(self.times) == len(self.p) == len(self.D_to_thermal)):
            raise ValueError("trajectory arrays must have equal length")


def rlm_steady_state_constant(E: float, g: float, beta: float) -> float:
    """Long-time occupation for constant ``g``: ``1/2 - Im psi(1/2 + beta (g^2/2 + iE) / 2pi) / pi``."""
    if not g > 0:
        raise ValueError("g must be positive")
    z = 0.5 + beta / (2.0 * math.pi) * complex(0.5 * g * g, E)
    return 0.5 - digamma_complex(z).imag / math.pi


def _check_probability(p):
    p = np.asarray(p, dtype=float)
    if np.any(p < -PROB_ATOL) or np.any(p > 1.0 + PROB_ATOL):
        raise QuadratureError(f"occupation left [0, 1]: range [{p.min():.3g}, {p.max():.3g}]")
    return p


# ---------------------------------------------------------------- Omega form


def _omega_breaks(E: float, beta: float, t_max: float, quad: Quadrature) -> np.ndarray:
    lo = min(0.0, E) - quad.window / beta
    hi = max(0.0, E) + quad.window / beta
    fine = 0.25 * min(1.0 / beta, 1.0 / max(t_max, 1e-300))
    coarse = min(0.5 / beta, 2.0 * math.pi / max(t_max, 1e-300))
    left = _graded(E, lo, fine, coarse)[::-1]
    right = _graded(E, hi, fine, coarse)
    return np.concatenate([left, right[1:]])


def _bracket(omega, E: float, beta: float):
    """``f(Omega) - theta(E - Omega)``; the jump at ``Omega = E`` is a panel edge."""
    return np.where(omega < E, -fermi_dirac(-omega, beta), fermi_dirac(omega, beta))


def _constant_integral(delta, weight, t, g: float):
    """``int weight |A|^2`` for constant ``g``, using
    ``|1 - e^{-(gamma + i delta) t}|^2 = 1 - 2 e^{-gamma t} cos(delta t) + e^{-2 gamma t}``.
    """
    gamma = 0.5 * g * g
    lor = g * g * weight / (gamma**2 + delta**2)
    damp = np.exp(-gamma * t)
    osc = np.cos(np.outer(t, delta)) @ lor
    return (1.0 + damp**2) * lor.sum() - 2.0 * damp * osc


def _s_breaks(t_end: float, sched: CouplingSchedule, beta: float, dmax: float) -> np.ndarray:
    hmax = min(2.0 * math.pi / dmax, 0.5 * beta)
    if sched.kind == "constant" and sched.g > 0:
        hmax = min(hmax, 1.0 / sched.rate)
    if sched.kind == "decaying":
        k = np.arange(0, 200)
        pts = sched.b * (2.0**k - 1.0)
        pts = pts[pts < min(t_end, hmax)]
        breaks = np.append(pts, t_end) if pts.size else np.array([0.0, t_end])
    else:
        breaks = np.array([0.0, t_end])
    return breaks


def _abs_amp_sq_general(omega, t, E, config: RlmConfig, breaks_s, n):
    """``|A(Omega, t)|^2`` for all ``t`` by cumulative s-quadrature."""
    sched = config.schedule
    t_eff = np.minimum(t, sched.cutoff)
    knots = np.unique(np.concatenate([breaks_s, t_eff[t_eff > 0]]))
    s, w = _composite_nodes(knots, n)
    v = w * sched.amplitude(s)
    # node index where each t_eff ends
    idx = np.searchsorted(s, t_eff, side="right")
    decay = np.exp(-0.5 * sched.integrated(t_eff))
    out = np.empty((t.size, omega.size))
    chunk = max(1, int(4e6 // max(s.size, 1)))
    for start in range(0, omega.size, chunk):
        om = omega[start:start + chunk]
        phase = np.exp(1j * np.outer(E - om, s)) * v[None, :]
        csum = np.concatenate([np.zeros((om.size, 1), complex), np.cumsum(phase, axis=1)], axis=1)
        amp = csum[:, idx].T * decay[:, None]
        out[:, start:start + chunk] = np.abs(amp) ** 2
    return out


def _omega_integral(config: RlmConfig, t: np.ndarray, refine: int) -> np.ndarray:
    E, beta, quad, sched = config.E_S, config.beta, config.quadrature, config.schedule
    t_max = float(np.minimum(t.max(), sched.cutoff)) if t.size else 0.0
    breaks = _split(_omega_breaks(E, beta, t_max, quad), refine)
    omega, w = _composite_nodes(breaks, quad.nodes)
    weight = w * _bracket(omega, E, beta) / (2.0 * math.pi)
    if sched.kind == "constant":
        t_eff = np.minimum(t, sched.cutoff)
        out = np.empty(t.size)
        chunk = max(1, int(4e6 // omega.size))
        for start in range(0, t.size, chunk):
            out[start:start + chunk] = _constant_integral(E - omega, weight, t_eff[start:start + chunk], sched.g)
        return out
    dmax = quad.window / beta + abs(E) + 1.0
    breaks_s = _split(_s_breaks(t_max, sched, beta, dmax), refine)
    breaks_s = _subdivide(breaks_s, min(2.0 * math.pi / dmax, 0.5 * beta) / 2**refine)
    return _abs_amp_sq_general(omega, t, E, config, breaks_s, quad.nodes) @ weight


def rlm_occupation(config: RlmConfig, t):
    """Dot occupation ``p(t)``; scalar or array ``t``.

    Refines the quadrature by panel bisection until successive estimates
    agree to ``quadrature.tol``.
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    G = config.schedule.integrated(t)
    base = config.p0 * np.exp(-G) - 0.5 * np.expm1(-G)
    prev = _omega_integral(config, t, 0)
    for level in range(1, config.quadrature.max_refinements + 1):
        cur = _omega_integral(config, t, level)
        if np.max(np.abs(cur - prev), initial=0.0) <= config.quadrature.tol:
            p = _check_probability(base + cur)
            return float(p[0]) if scalar else p
        prev = cur
    raise QuadratureError("Omega quadrature did not converge")


# ----------------------------------------------------------- time-domain form


def _kernel(u, E: float, beta: float):
    """``sin(E u) / sinh(pi u / beta)`` with the limit ``E beta / pi`` at ``u = 0``."""
    u = np.asarray(u, dtype=float)
    out = np.full(u.shape, E * beta / math.pi)
    nz = np.abs(u) >= 1e-10
    x = math.pi * u[nz] / beta
    # sinh overflows past |x| ~ 710; the kernel is zero to double precision there
    big = np.abs(x) > 700.0
    val = np.zeros(x.shape)
    val[~big] = np.sin(E * u[nz][~big]) / np.sinh(x[~big])
    out[nz] = val
    return out


def _decay_integral(E, beta, a, b, t, refine, n=12):
    """``int_0^t int_0^t psi(s) psi(s') K(s - s')`` for every ``t`` (sorted)."""
    t_max = float(t.max())
    hmax = 0.5 * min(beta, math.pi / abs(E)) if E != 0 else 0.5 * beta
    k = np.arange(0, 200)
    grade = b * (2.0**k - 1.0)
    grade = grade[(grade > 0) & (grade < min(t_max, hmax))]
    knots = np.unique(np.concatenate([[0.0], grade, t[t > 0]]))
    knots = _subdivide(_split(knots, refine), hmax / 2**refine)
    s, w = _composite_nodes(knots, n)
    v = w * (s + b) ** (0.5 * (a - 1.0))
    # contribution of node i: v_i (2 sum_{j<i} K_ij v_j + K_ii v_i)
    contrib = np.empty(s.size)
    chunk = max(1, int(4e6 // max(s.size, 1)))
    for start in range(0, s.size, chunk):
        rows = slice(start, min(start + chunk, s.size))
        kmat = _kernel(s[rows, None] - s[None, :rows.stop], E, beta)
        kmat = np.tril(kmat, k=start - 1)
        contrib[rows] = v[rows] * (2.0 * kmat @ v[:rows.stop] + (E * beta / math.pi) * v[rows])
    cum = np.concatenate([[0.0], np.cumsum(contrib)])
    return cum[np.searchsorted(s, t, side="right")]


def rlm_occupation_decaying(E: float, beta: float, a: float, b: float, p0: float, t,
                            tol: float = QUAD_TOL, max_refinements: int = 4):
    """Occupation under ``g = sqrt(a / (t + b))`` from the time-domain kernel form."""
    if not (a > 0 and b > 0 and beta > 0):
        raise ValueError("need a > 0, b > 0, beta > 0")
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    order = np.argsort(t, kind="stable")
    ts = t[order]
    base = 0.5 + (p0 - 0.5) * (b / (ts + b)) ** a
    pref = a / (ts + b) ** a / (2.0 * beta)
    if E == 0.0 or not ts.size or ts[-1] == 0.0:
        p_sorted = base
    else:
        prev = _decay_integral(E, beta, a, b, ts, 0)
        for level in range(1, max_refinements + 1):
            cur = _decay_integral(E, beta, a, b, ts, level)
            if np.max(np.abs(pref * (cur - prev))) <= tol:
                break
            prev = cur
        else:
            raise QuadratureError("time-domain quadrature did not converge")
        p_sorted = base - pref * cur
    p = np.empty_like(p_sorted)
    p[order] = p_sorted
    p = _check_probability(p)
    return float(p[0]) if scalar else p


# ------------------------------------------------------------- trajectories


def _occupations(config: RlmConfig, times) -> np.ndarray:
    sched = config.schedule
    if sched.kind == "decaying" and math.isinf(sched.cutoff):
        return rlm_occupation_decaying(config.E_S, config.beta, sched.a, sched.b, config.p0,
                                       np.asarray(times, dtype=float), tol=config.quadrature.tol)
    return np.atleast_1d(rlm_occupation(config, np.asarray(times, dtype=float)))


def _angle_to_thermal(p, q):
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    pp = np.stack([p, 1.0 - p], axis=-1)
    return bures_angle_diagonal(pp, np.broadcast_to(np.array([q, 1.0 - q]), pp.shape))


def rlm_bures_to_thermal(config: RlmConfig, t):
    """Bures angle between the dot state at ``t`` and its Gibbs state."""
    p = _occupations(config, np.atleast_1d(t))
    d = _angle_to_thermal(p, config.q_thermal)
    return float(d[0]) if np.ndim(t) == 0 else d


def rlm_trajectory(config: RlmConfig, times) -> Trajectory:
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be ascending")
    p = _occupations(config, times)
    return Trajectory(times, p, _angle_to_thermal(p, config.q_thermal))


def _steady_state_angle(config: RlmConfig) -> float | None:
    sched = config.schedule
    if sched.kind == "constant" and math.isinf(sched.cutoff) and sched.g > 0:
        p_inf = rlm_steady_state_constant(config.E_S, sched.g, config.beta)
        return float(_angle_to_thermal(p_inf, config.q_thermal))
    return None


def _bisect_crossing(config: RlmConfig, epsilon: float, lo: float, hi: float, xtol: float) -> float:
    while hi - lo > xtol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if rlm_bures_to_thermal(config, mid) <= epsilon:
            hi = mid
        else:
            lo = mid
    return hi


def thermalization_times(config: RlmConfig, epsilons, step: float | None = None,
                         horizon: float | None = None, max_extensions: int = 8,
                         xtol: float = 1e-9) -> np.ndarray:
    """First times the dot comes within Bures angle ``epsilon`` of its Gibbs state.

    One scan with ``step`` (default ``beta / 100``) up to ``horizon``
    (default ``50 beta``) serves every ``epsilon``; each bracketing interval
    is then bisected.  Entries with no crossing are :data:`UNREACHABLE`.
    The horizon is doubled while the long-time limit is known to lie inside
    a pending ball.
    """
    eps = np.atleast_1d(np.asarray(epsilons, dtype=float))
    if np.any(eps <= 0.0) or np.any(eps >= math.pi / 2):
        raise ValueError("epsilon must lie in (0, pi/2)")
    beta = config.beta
    step = beta / 100.0 if step is None else step
    horizon = 50.0 * beta if horizon is None else horizon
    q = config.q_thermal
    out = np.full(eps.shape, UNREACHABLE)
    pending = _angle_to_thermal(config.p0, q) > eps
    out[~pending] = 0.0
    d_inf = _steady_state_angle(config)
    n_total = int(round(horizon / step))
    block, done = 100, 1
    for _ in range(max_extensions + 1):
        # blocks keep the Omega mesh matched to the times actually scanned
        for first in range(done, n_total + 1, block):
            if not pending.any():
                return out
            grid = step * np.arange(first - 1, min(first + block, n_total + 1))
            d = _angle_to_thermal(_occupations(config, grid), q)
            for i in np.flatnonzero(pending):
                hit = np.flatnonzero(d <= eps[i])
                if hit.size:
                    k = int(hit[0])
                    out[i] = _bisect_crossing(config, eps[i], float(grid[k - 1]), float(grid[k]), xtol)
                    pending[i] = False
        if d_inf is None:
            break
        pending &= eps >= d_inf
        if not pending.any():
            break
        done, n_total = n_total + 1, 2 * n_total
    return out


def thermalization_time(config: RlmConfig, epsilon: float, **kwargs) -> float:
    """Single-epsilon form of :func:`thermalization_times`."""
    return float(thermalization_times(config, [epsilon], **kwargs)[0])


@dataclass(frozen=True)
class ForbiddenRegionReport:
    times: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    rhs: np.ndarray
    margins: np.ndarray

    @property
    def min_margin(self) -> float:
        return float(self.margins.min())

    @property
    def violations(self) -> int:
        return int(np.sum(self.margins < -VIOLATION_TOL))


def dot_hamiltonian(E: float) -> np.ndarray:
    """``E a^dagger a`` on the empty/occupied basis."""
    return np.diag([0.0, float(E)])


def forbidden_region_check(config: RlmConfig, e1: float, e2: float, times,
                           tol: float = VIOLATION_TOL) -> ForbiddenRegionReport:
    """Check ``max(D1, D2) >= D(omega_1, omega_2)/2 - t |E1 - E2| / 4`` along two runs.

    Both runs share ``config.p0`` and the schedule; ``config.E_S`` is ignored.
    Raises :class:`BoundViolation` if any margin is below ``-tol``.
    """
    times = np.asarray(times, dtype=float)
    rhs = np.atleast_1d(speed_limit_rhs(times, dot_hamiltonian(e1), dot_hamiltonian(e2), config.beta))
    traj = [
        rlm_trajectory(RlmConfig(e, config.beta, config.p0, config.schedule, config.quadrature), times)
        for e in (e1, e2)
    ]
    margins = np.maximum(traj[0].D_to_thermal, traj[1].D_to_thermal) - rhs
    report = ForbiddenRegionReport(times, traj[0].p, traj[1].p,
                                   traj[0].D_to_thermal, traj[1].D_to_thermal, rhs, margins)
    if report.min_margin < -tol:
        k = int(np.argmin(margins))
        raise BoundViolation(f"margin {margins[k]:.3g} at t = {times[k]:.6g}")
    return report
