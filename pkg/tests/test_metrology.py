import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import gibbs_expm, qfi_central
from planckian.errors import NumericalInstability, UnsupportedLimit
from planckian.metrology import (
    CoarseGraining,
    Perturbation,
    best_bipartition,
    chi_tilde_coherent,
    chi_tilde_diagonal,
    chi_tilde_gapped,
    chi_tilde_qubit,
    heisenberg_angle_bound,
    heisenberg_qfi_bound,
    k_separable_qfi_bound,
    normalized_sqrt_qfi,
    qfi_finite_difference,
    qfi_thermal,
    qubit_transversal,
)
from planckian.quantum import gibbs_state, random_hermitian

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
P_GIBBS = 1.0 / (1.0 + math.exp(-1.0))
seeds = st.integers(0, 2**32 - 1)


class TestQfiThermal:
    def test_classical_half(self):
        assert qfi_thermal(np.zeros((2, 2)), 1.0, np.diag([0.0, 1.0])) == pytest.approx(0.25)

    def test_qubit_transversal(self):
        assert qfi_thermal(np.diag([0.0, 1.0]), 1.0, SIGMA_X / 2) == pytest.approx(0.2135522670340726, abs=1e-12)

    def test_infinite_beta(self):
        with pytest.raises(UnsupportedLimit):
            qfi_thermal(np.diag([0.0, 1.0]), math.inf, SIGMA_X)

    def test_degenerate_levels_use_limit(self):
        val = qfi_thermal(np.zeros((2, 2)), 1.0, SIGMA_X / 2)
        assert val == pytest.approx(0.25, abs=1e-12)

    def test_perturbation_type(self):
        pert = Perturbation(SIGMA_X)
        assert pert.seminorm == pytest.approx(2.0)
        assert normalized_sqrt_qfi(np.diag([0.0, 1.0]), 1.0, pert) == pytest.approx(
            math.sqrt(qfi_thermal(np.diag([0.0, 1.0]), 1.0, SIGMA_X)) / 2.0)

    def test_perturbation_rejects_identity(self):
        with pytest.raises(ValueError):
            Perturbation(np.eye(2))

    def test_random_qutrit_matches_oracle(self, rng):
        h, v, beta = random_hermitian(3, rng), random_hermitian(3, rng), 0.8
        ref = qfi_central(lambda th: gibbs_expm(h + th * v, beta), h=1e-4)
        assert qfi_thermal(h, beta, v) == pytest.approx(ref, rel=1e-5)

    @given(seed=seeds, d=st.integers(2, 4), beta=st.floats(0.1, 3.0))
    def test_matches_finite_difference(self, seed, d, beta):
        rng = np.random.default_rng(seed)
        h, v = random_hermitian(d, rng), random_hermitian(d, rng)
        fd = qfi_finite_difference(lambda th: gibbs_state(h + th * v, beta))
        exact = qfi_thermal(h, beta, v)
        assert abs(exact - fd) / max(exact, 1e-8) < 1e-4

    @given(seed=seeds, c=st.floats(-5, 5))
    def test_shift_invariant(self, seed, c):
        rng = np.random.default_rng(seed)
        h, v = random_hermitian(3, rng), random_hermitian(3, rng)
        assert qfi_thermal(h + c * np.eye(3), 1.0, v) == pytest.approx(qfi_thermal(h, 1.0, v), rel=1e-9)
        assert qfi_thermal(h, 1.0, v + c * np.eye(3)) == pytest.approx(qfi_thermal(h, 1.0, v), rel=1e-9, abs=1e-14)


class TestFiniteDifference:
    def test_pure_rotation(self):
        plus = np.array([1, 1]) / math.sqrt(2)

        def family(th):
            psi = np.exp(-0.5j * th * np.array([1, -1])) * plus
            return np.outer(psi, psi.conj())

        assert qfi_finite_difference(family) == pytest.approx(1.0, rel=1e-9)

    def test_constant_family(self):
        rho = np.diag([0.3, 0.7])
        assert qfi_finite_difference(lambda th: rho) == 0.0

    def test_unstable_family_flagged(self):
        def family(th):
            # infinite slope at 0: the h and h/2 estimates disagree
            p = 0.5 + 0.3 * math.copysign(math.sqrt(abs(th)), th)
            return np.diag([p, 1 - p])

        with pytest.raises(NumericalInstability):
            qfi_finite_difference(family)


class TestChiTilde:
    @pytest.mark.parametrize("p, expected", [(0.5, 0.5), (2 / 3, math.sqrt(2) / 3), (0.0, 0.0), (1.0, 0.0)])
    def test_diagonal(self, p, expected):
        assert chi_tilde_diagonal(cg=p) == pytest.approx(expected, abs=1e-15)

    def test_diagonal_from_populations(self):
        assert chi_tilde_diagonal([0.6, 0.3, 0.1]) == pytest.approx(math.sqrt(0.24))

    def test_coherent_qubit_pair(self):
        p = 0.8
        expected = (2 * p - 1) / math.log(p / (1 - p))
        assert chi_tilde_coherent([p, 1 - p], [(0, 1)]) == pytest.approx(expected, rel=1e-13)

    def test_coherent_equal_pair(self):
        assert chi_tilde_coherent([0.5, 0.5], [(0, 1)]) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("eta", [1e-6, -1e-6])
    def test_coherent_near_equal(self, eta):
        p = 0.3
        val = chi_tilde_coherent([p, p * (1 + eta), 1 - p * (2 + eta)], [(0, 1)])
        assert val == pytest.approx(math.sqrt(p / 2), abs=1e-6)

    def test_coherent_first_order_convergence(self):
        p = 0.2
        errs = [abs(chi_tilde_coherent([p, p * (1 + e)], [(0, 1)]) - math.sqrt(p / 2)) for e in (1e-2, 1e-3)]
        assert 5 < errs[0] / errs[1] < 20

    def test_coherent_rejects_overlap(self):
        with pytest.raises(ValueError):
            chi_tilde_coherent([0.3, 0.3, 0.4], [(0, 1), (1, 2)])

    def test_coherent_low_temperature_limit(self):
        p = 1 - 1e-9
        bd = math.log(p / (1 - p))
        assert chi_tilde_coherent([p, 1 - p], [(0, 1)]) == pytest.approx((2 * p - 1) / bd, rel=1e-12)

    @pytest.mark.parametrize("p, expected", [(0.5, 0.5), (P_GIBBS, 0.4621171572600098)])
    def test_qubit(self, p, expected):
        assert chi_tilde_qubit(p) == pytest.approx(expected, abs=1e-12)

    def test_qubit_transversal_dominates(self):
        p = np.linspace(0.001, 0.999, 999)
        trans = np.array([qubit_transversal(x) for x in p])
        assert np.all(trans >= p * (1 - p) - 1e-15)

    @pytest.mark.parametrize("p", np.linspace(0.01, 0.99, 21))
    def test_qubit_is_max_over_interpolation(self, p):
        theta = np.linspace(0, math.pi / 2, 201)
        objective = np.cos(theta) ** 2 * p * (1 - p) + np.sin(theta) ** 2 * qubit_transversal(p)
        assert chi_tilde_qubit(p) == pytest.approx(math.sqrt(objective.max()), abs=1e-14)
        assert chi_tilde_qubit(p) >= chi_tilde_diagonal(cg=max(p, 1 - p))

    def test_qubit_equals_sqrt_qfi(self):
        h = np.diag([0.0, 1.0])
        assert normalized_sqrt_qfi(h, 1.0, SIGMA_X) == pytest.approx(chi_tilde_qubit(P_GIBBS), rel=1e-12)

    def test_diagonal_at_unit_gap(self):
        assert chi_tilde_diagonal(cg=P_GIBBS) == pytest.approx(math.sqrt(math.e) / (1 + math.e), abs=1e-15)

    def test_gapped_qubit_is_transversal(self):
        assert chi_tilde_gapped(P_GIBBS, 2) == pytest.approx(chi_tilde_qubit(P_GIBBS), abs=1e-15)

    def test_gapped_dimension(self):
        p, d = 0.9, 10
        assert chi_tilde_gapped(p, d) == pytest.approx((2 * p - 1) / math.log((d - 1) * p / (1 - p)))

    @pytest.mark.parametrize("args", [(0.4, 3), (0.7, 1), (1.0, 3)])
    def test_gapped_domain(self, args):
        with pytest.raises(ValueError):
            chi_tilde_gapped(*args)


def _enumerate_best(p):
    best = None
    for r in range(len(p) + 1):
        for idx in itertools.combinations(range(len(p)), r):
            w = p[list(idx)].sum() if idx else 0.0
            v = w * (1 - w)
            if best is None or v > best + 1e-15:
                best = v
    return best


class TestBipartition:
    def test_equal_pair(self):
        assert best_bipartition([0.5, 0.5]).p_star == pytest.approx(0.5)

    def test_three_levels(self):
        cg = best_bipartition([0.6, 0.3, 0.1])
        assert cg.p_star in (pytest.approx(0.4), pytest.approx(0.6))
        assert cg.variance == pytest.approx(0.24)

    def test_uniform_four(self):
        assert best_bipartition(np.full(4, 0.25)).p_star == pytest.approx(0.5)

    def test_greedy_fallback_flagged(self, rng):
        p = rng.dirichlet(np.ones(30))
        cg = best_bipartition(p)
        assert not cg.optimal
        assert 0 <= cg.p_star <= 1

    def test_invariants(self):
        cg = CoarseGraining.from_populations([0.2, 0.5, 0.3], [1])
        assert cg.p_star == pytest.approx(cg.q0 / (cg.q0 + cg.q1), abs=1e-12)
        assert cg.p_star == pytest.approx(0.5)

    @given(seed=seeds, d=st.integers(2, 10))
    def test_matches_enumeration(self, seed, d):
        p = np.random.default_rng(seed).dirichlet(np.ones(d))
        cg = best_bipartition(p)
        assert cg.optimal
        assert cg.variance == pytest.approx(_enumerate_best(p), abs=1e-14)


class TestDynamicalBounds:
    def test_heisenberg(self):
        assert heisenberg_qfi_bound(0.0, SIGMA_Z) == 0.0
        beta = 1.7
        kappa = np.diag([0.0, 1.0])
        assert heisenberg_qfi_bound(beta, kappa) == pytest.approx(beta**2)
        assert heisenberg_angle_bound(beta, kappa) == pytest.approx(beta / 2)

    def test_heisenberg_negative_time(self):
        with pytest.raises(ValueError):
            heisenberg_qfi_bound(-1.0, SIGMA_Z)

    @pytest.mark.parametrize("t, k, n, h, expected", [
        (1.0, 4, 6, 1.0, 8.0),
        (2.0, 5, 5, 0.5, 2.0**2 * 25 * 0.25 / 4),
        (2.0, 1, 5, 0.5, 2.0**2 * 5 * 0.25 / 4),
    ])
    def test_k_separable(self, t, k, n, h, expected):
        assert k_separable_qfi_bound(t, k, n, h) == pytest.approx(expected)

    def test_k_separable_domain(self):
        with pytest.raises(ValueError):
            k_separable_qfi_bound(1.0, 0, 3, 1.0)
