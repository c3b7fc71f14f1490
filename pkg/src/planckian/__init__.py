"""Thermalization speed limits in units of the Planckian time ``hbar / k_B T``.

Units throughout: ``hbar = k_B = 1``, so ``tau_Pl = beta``.
"""
from .bound import (
    EPS_MAX,
    BoundQuery,
    ChiBoundResult,
    chi_exact_bruteforce,
    chi_lower_ansatz,
    chi_lower_optimized,
    chi_upper,
    eps_to_radians,
    pairwise_chi,
    speed_limit_rhs,
)
from .errors import (
    BoundViolation,
    DegeneratePair,
    DegenerateTask,
    DimError,
    InvalidOperator,
    NotAThermalizer,
    NumericalInstability,
    PlanckianError,
    PoleError,
    QuadratureError,
    ScheduleError,
    UnsupportedDimension,
    UnsupportedLimit,
)
from .machines import (
    TwoPointTask,
    discrimination_overlap,
    optimal_two_point_time,
    swap_machine_time,
    uhlmann_target_overlap,
)
from .metrology import (
    CoarseGraining,
    best_bipartition,
    chi_tilde_coherent,
    chi_tilde_diagonal,
    chi_tilde_gapped,
    chi_tilde_qubit,
    qfi_finite_difference,
    qfi_thermal,
)
from .quantum import (
    Schedule,
    bures_angle,
    bures_distance,
    fidelity,
    gibbs_state,
    partial_trace,
    propagate,
    spectral_seminorm,
)
from .rlm import (
    CouplingSchedule,
    RlmConfig,
    Trajectory,
    fermi_dirac,
    forbidden_region_check,
    rlm_bures_to_thermal,
    rlm_occupation,
    rlm_occupation_decaying,
    rlm_steady_state_constant,
    rlm_trajectory,
    thermalization_time,
)
from .special import digamma_complex

__version__ = "0.1.0"
