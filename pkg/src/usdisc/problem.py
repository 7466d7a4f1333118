"""Domain types for two-state discrimination instances and measurements.

A problem is a pair of density matrices with prior probabilities, plus
an optional involution relating them. A measurement is the three-element
decomposition (conclusive for state 0, conclusive for state 1,
inconclusive). Validation is report based and never throws so the
command line can surface every violation at once.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError
from .linalg import (
    HERM_TOL,
    PSD_TOL,
    REL_CUTOFF,
    hermitize,
    psd_check,
    require_hermitian,
    support_decomposition,
)

TRACE_TOL = 1e-10
PRIOR_TOL = 1e-12
COMPLETENESS_TOL = 1e-9


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    declared_rank: Optional[int] = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @staticmethod
    def from_matrix(matrix, declared_rank=None, renormalize: bool = False):
        m = require_hermitian(matrix, name="density matrix")
        tr = np.trace(m).real
        if renormalize:
            if tr <= 0:
                raise DomainError("cannot renormalize a matrix with nonpositive trace")
            m = m / tr
        elif abs(tr - 1.0) > TRACE_TOL:
            raise DomainError(
                f"density matrix trace {tr!r} is not 1; pass renormalize=True to rescale"
            )
        return DensityMatrix(matrix=m, declared_rank=declared_rank)


@dataclass(frozen=True)
class UsdProblem:
    rho0: DensityMatrix
    rho1: DensityMatrix
    eta0: float
    eta1: float
    gu_involution: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.rho0.dim


@dataclass(frozen=True)
class Povm:
    """Three-outcome measurement (identify 0, identify 1, give up)."""

    e0: np.ndarray
    e1: np.ndarray
    eq: np.ndarray


@dataclass
class ValidationReport:
    """Named residuals plus the subset that exceeded tolerance."""

    residuals: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def check(self, name: str, residual: float, bound: float):
        self.residuals[name] = float(residual)
        if not residual <= bound:
            self.failures.append(name)


@dataclass(frozen=True)
class StandardFormReport:
    supports_overlap: bool
    dim_equals_r0_plus_r1: bool
    kernel0_meets_support1_dim: int
    kernel1_meets_support0_dim: int


def _hermiticity_residual(a: np.ndarray) -> float:
    skew = float(np.abs(a - a.conj().T).max())
    return skew / max(1.0, float(np.abs(a).max()))


def validate_problem(p: UsdProblem, tol_psd: float = PSD_TOL,
                     tol_rank: float = REL_CUTOFF) -> ValidationReport:
    """Check every instance invariant; the report lists each residual."""
    rep = ValidationReport()
    r0, r1 = p.rho0.matrix, p.rho1.matrix
    if r0.shape != r1.shape:
        rep.residuals["dim_match"] = abs(r0.shape[0] - r1.shape[0])
        rep.failures.append("dim_match")
        return rep
    for name, state in (("rho0", p.rho0), ("rho1", p.rho1)):
        m = state.matrix
        rep.check(f"{name}_hermitian", _hermiticity_residual(m), HERM_TOL)
        _, mn = psd_check(m, tol_psd)
        rep.check(f"{name}_psd", max(0.0, -mn), tol_psd * max(1.0, np.abs(m).max()))
        rep.check(f"{name}_trace", abs(np.trace(m).real - 1.0), TRACE_TOL)
        if state.declared_rank is not None:
            rank = support_decomposition(hermitize(m), tol_rank).rank
            rep.check(f"{name}_declared_rank", abs(rank - state.declared_rank), 0)
    rep.check("priors_sum", abs(p.eta0 + p.eta1 - 1.0), PRIOR_TOL)
    for name, eta in (("eta0", p.eta0), ("eta1", p.eta1)):
        rep.check(f"{name}_in_open_interval", 0.0 if 0.0 < eta < 1.0 else 1.0, 0.0)
    if p.gu_involution is not None:
        gu = verify_gu_structure(p.rho0, p.rho1, p.gu_involution)
        rep.residuals.update({f"gu_{k}": v for k, v in gu.residuals.items()})
        rep.failures.extend(f"gu_{k}" for k in gu.failures)
    return rep


def validate_povm(p: UsdProblem, m: Povm, tol: float = 1e-9) -> ValidationReport:
    """Positivity, completeness and the two error-free trace conditions."""
    rep = ValidationReport()
    eye = np.eye(p.dim)
    for name, el in (("e0", m.e0), ("e1", m.e1), ("eq", m.eq)):
        rep.check(f"{name}_hermitian", _hermiticity_residual(el), 1e-10)
        _, mn = psd_check(el, PSD_TOL)
        rep.check(f"{name}_psd", max(0.0, -mn), PSD_TOL * max(1.0, np.abs(el).max()))
    total = m.e0 + m.e1 + m.eq
    rep.check("completeness", float(np.abs(total - eye).max()), COMPLETENESS_TOL)
    rep.check("error_free_0", abs(np.trace(m.e0 @ p.rho1.matrix).real), tol)
    rep.check("error_free_1", abs(np.trace(m.e1 @ p.rho0.matrix).real), tol)
    return rep


def failure_probability(p: UsdProblem, m: Povm):
    """Total and per-state inconclusive probabilities (q, q0, q1)."""
    q0 = p.eta0 * np.trace(m.eq @ p.rho0.matrix).real
    q1 = p.eta1 * np.trace(m.eq @ p.rho1.matrix).real
    return q0 + q1, q0, q1


def _intersection_dim(pa: np.ndarray, pb: np.ndarray, rel_cutoff: float = REL_CUTOFF) -> int:
    # dim(A meet B) = rank(P_A) + rank(P_B) - dim(A join B); the join is
    # the support of the projector sum, which avoids principal-angle
    # computations that get ill conditioned at these dimensions
    ra = support_decomposition(pa, rel_cutoff).rank
    rb = support_decomposition(pb, rel_cutoff).rank
    runion = support_decomposition(hermitize(pa + pb), rel_cutoff).rank
    return max(0, ra + rb - runion)


def standard_form_report(p: UsdProblem, rel_cutoff: float = REL_CUTOFF) -> StandardFormReport:
    """Support geometry diagnostics for reduction preconditions."""
    d0 = support_decomposition(p.rho0.matrix, rel_cutoff)
    d1 = support_decomposition(p.rho1.matrix, rel_cutoff)
    sigma = support_decomposition(hermitize(p.rho0.matrix + p.rho1.matrix), rel_cutoff)
    overlap = d0.rank + d1.rank > sigma.rank
    return StandardFormReport(
        supports_overlap=overlap,
        dim_equals_r0_plus_r1=(d0.rank + d1.rank == p.dim),
        kernel0_meets_support1_dim=_intersection_dim(
            d0.kernel_projector, d1.support_projector, rel_cutoff
        ),
        kernel1_meets_support0_dim=_intersection_dim(
            d1.kernel_projector, d0.support_projector, rel_cutoff
        ),
    )


def verify_gu_structure(rho0: DensityMatrix, rho1: DensityMatrix, u: np.ndarray,
                        tol: float = 1e-9) -> ValidationReport:
    """Check that u is a Hermitian involution conjugating state 0 to state 1."""
    rep = ValidationReport()
    u = np.asarray(u, dtype=complex)
    if u.shape != rho0.matrix.shape:
        rep.residuals["u_shape"] = 1.0
        rep.failures.append("u_shape")
        return rep
    eye = np.eye(u.shape[0])
    rep.check("u_unitary", float(np.abs(u.conj().T @ u - eye).max()), tol)
    rep.check("u_involution", float(np.abs(u @ u - eye).max()), tol)
    rep.check("u_hermitian", float(np.abs(u - u.conj().T).max()), tol)
    rep.check(
        "conjugation", float(np.abs(rho1.matrix - u @ rho0.matrix @ u).max()), tol
    )
    return rep


def always_fail_povm(dim: int) -> Povm:
    """The trivial measurement that never identifies anything."""
    eye = np.eye(dim, dtype=complex)
    zero = np.zeros((dim, dim), dtype=complex)
    return Povm(e0=zero, e1=zero.copy(), eq=eye)
