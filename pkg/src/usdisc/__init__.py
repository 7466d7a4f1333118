"""Optimal unambiguous discrimination of two mixed quantum states.

Analytic measurement constructions for the two known exact solution
families, optimality certificates to gate them, a seeded numerical
oracle to cross-check them, and the weak-coherent-pulse application
curves, all behind a small CLI.
"""

from .bb84 import (
    Bb84States,
    Bb84SweepRow,
    CoherentBb84Model,
    basis_problem,
    bit_problem,
    bit_spectrum_closed_form,
    build_states,
    coefficients,
    find_mu0,
    locate_threshold,
    q_basis_closed_form,
    sweep,
    sweep_csv,
)
from .bounds import (
    FidelityData,
    RankConditionReport,
    failure_lower_bound,
    fidelity_operators,
    prior_regime_bounds,
    rank_condition_check,
    tighter_q0_bound,
)
from .certificates import (
    OptimalityCertificate,
    build_fidelity_certificate,
    fit_certificate,
    verify_certificate,
)
from .errors import (
    BracketFail,
    CertificateRejected,
    DegenerateBound,
    DomainError,
    EigenDecompositionError,
    NotPositiveSemidefinite,
    OverlappingSupports,
    PreconditionFail,
    ProblemFormatError,
    RankConditionsFail,
    SpectrumAnomaly,
    UsdError,
)
from .linalg import (
    PSD_TOL,
    REL_CUTOFF,
    EigenSystem,
    SupportDecomposition,
    eigh,
    hermitize,
    pseudo_inverse,
    psd_check,
    require_hermitian,
    sqrt_psd,
    support_decomposition,
)
from .oracle import OracleResult, oracle_optimize
from .problem import (
    DensityMatrix,
    Povm,
    StandardFormReport,
    UsdProblem,
    ValidationReport,
    always_fail_povm,
    failure_probability,
    standard_form_report,
    validate_povm,
    validate_problem,
    verify_gu_structure,
)
from .solvers import (
    Branch,
    GuSolution,
    HostState,
    SolutionReport,
    SplitOffSubspace,
    gu_kernel_spectrum,
    projectivity_check,
    solve_first_class,
    solve_gu_4d,
    spectrum_negation_check,
    split_off_extraction,
)

__version__ = "0.1.0"
