"""Slow, independent reference implementations used only by the tests."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, linalg


def gibbs_expm(h, beta):
    rho = linalg.expm(-beta * np.asarray(h, dtype=complex))
    return rho / np.trace(rho).real


def fidelity_eig(rho, sigma):
    """``(Tr sqrt(sqrt(sigma) rho sqrt(sigma)))**2`` by two eigendecompositions."""
    w, v = np.linalg.eigh(sigma)
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    m = root @ rho @ root
    lam = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return float(np.sum(np.sqrt(np.clip(lam, 0.0, None))) ** 2)


def bures_angle_arccos(rho, sigma):
    return math.acos(min(1.0, math.sqrt(fidelity_eig(rho, sigma))))


def partial_trace_loops(rho, d_s, d_m, keep="S"):
    out = np.zeros((d_s, d_s) if keep == "S" else (d_m, d_m), dtype=complex)
    for i in range(out.shape[0]):
        for j in range(out.shape[1]):
            if keep == "S":
                out[i, j] = sum(rho[i * d_m + k, j * d_m + k] for k in range(d_m))
            else:
                out[i, j] = sum(rho[k * d_m + i, k * d_m + j] for k in range(d_s))
    return out


def qfi_central(family, h=1e-3):
    """``4 D(rho(-h), rho(h))**2 / (2h)**2`` with the eigen-route fidelity."""
    d = bures_angle_arccos(family(-h), family(h))
    return (d / h) ** 2


def two_level_shift_angle(p_star, alpha, delta):
    """Bures angle of Gibbs states of ``(0, E +/- shift)`` built with expm."""
    e = -math.log((1.0 - p_star) / p_star)  # weight of level 1 is 1 - p_star at beta = 1
    h1 = np.diag([0.0, e + alpha * delta])
    h2 = np.diag([0.0, e - (1.0 - alpha) * delta])
    return bures_angle_arccos(gibbs_expm(h1, 1.0), gibbs_expm(h2, 1.0))


def steady_state_lorentzian(E, g, beta):
    """``int dOmega / pi f(Omega) (g^2/2) / (g^4/4 + (E - Omega)^2)``."""
    gamma = 0.5 * g * g

    def f(w):
        return 0.5 * (1.0 - math.tanh(0.5 * beta * w)) * gamma / (gamma**2 + (E - w) ** 2) / math.pi

    total = 0.0
    edges = [-math.inf, E - 50 * gamma - 40 / beta, E, E + 50 * gamma + 40 / beta, math.inf]
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=400)[0]
    return total


def decaying_dblquad(E, beta, a, b, p0, t):
    """Time-domain double integral for ``g = sqrt(a/(t+b))`` by adaptive quadrature."""

    def kernel(s, sp):
        u = s - sp
        if abs(u) < 1e-12:
            return (s + b) ** (a - 1.0) * E * beta / math.pi
        return ((s + b) * (sp + b)) ** (0.5 * (a - 1.0)) * math.sin(E * u) / math.sinh(math.pi * u / beta)

    val = integrate.dblquad(kernel, 0.0, t, 0.0, t, epsabs=1e-12, epsrel=1e-11)[0]
    return 0.5 + (p0 - 0.5) * (b / (t + b)) ** a - a / (t + b) ** a * val / (2.0 * beta)


def rabi_state(t):
    """``exp(-i t sigma_x / 2) |0>`` projector."""
    psi = np.array([math.cos(t / 2), -1j * math.sin(t / 2)])
    return np.outer(psi, psi.conj())
