"""Analytic optimal-measurement constructions and structural checks.

Two exact solution families are implemented. The first covers any pair
whose rank-condition operators are both PSD; there the failure
probability equals the fidelity bound and the conclusive elements have
a closed sandwich formula. The second covers equal-prior involution
symmetric pairs of rank 2 in dimension 4; when the first family does
not apply, the optimum is a projective measurement built from the
kernel-compressed involution. Every emitted solution is gated by an
optimality certificate before it is returned.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .bounds import fidelity_operators, rank_condition_check
from .certificates import (
    CERT_TOL,
    OptimalityCertificate,
    build_fidelity_certificate,
    fit_certificate,
    verify_certificate,
)
from .errors import (
    CertificateRejected,
    OverlappingSupports,
    PreconditionFail,
    RankConditionsFail,
    SpectrumAnomaly,
)
from .linalg import (
    PSD_TOL,
    REL_CUTOFF,
    eigh,
    hermitize,
    psd_check,
    spectral_norm,
    sqrt_psd,
    support_decomposition,
)
from .problem import (
    Povm,
    UsdProblem,
    ValidationReport,
    failure_probability,
    standard_form_report,
    validate_povm,
    verify_gu_structure,
)

# eigenvalue threshold treated as "equals one" when hunting unit
# eigenvectors of measurement elements (their spectra live in [0, 1])
UNIT_EIG_THRESHOLD = 1.0 - 1e-7


class Branch(Enum):
    FIRST_CLASS_FIDELITY = "FirstClassFidelity"
    GU_PROJECTIVE = "GuProjective"
    ORACLE_ONLY = "OracleOnly"


class HostState(Enum):
    RHO0 = "Rho0"
    RHO1 = "Rho1"


@dataclass
class SolutionReport:
    q_opt: float
    q0: float
    q1: float
    povm: Povm
    branch: Branch
    diagnostics: dict = field(default_factory=dict)
    certificate: Optional[OptimalityCertificate] = None


@dataclass(frozen=True)
class GuSolution:
    kernel_operator: np.ndarray
    a: float
    b: float
    phase: float
    x_vector: np.ndarray


@dataclass(frozen=True)
class SplitOffSubspace:
    e_vector: np.ndarray
    e_prime_vector: np.ndarray
    host_state: HostState
    residuals: dict


def _gate_solution(p: UsdProblem, m: Povm, cert: OptimalityCertificate) -> dict:
    """Validate the measurement and its certificate; raise on failure."""
    vrep = validate_povm(p, m)
    if not vrep.ok:
        raise CertificateRejected(
            f"constructed measurement failed validation: {vrep.failures}",
            residuals=vrep.residuals,
        )
    crep = verify_certificate(p, m, cert, CERT_TOL)
    cert.residuals = crep.residuals
    if not crep.ok:
        raise CertificateRejected(
            f"certificate conditions violated: {crep.failures}",
            residuals=crep.residuals,
        )
    merged = dict(vrep.residuals)
    merged.update(crep.residuals)
    return merged


def solve_first_class(p: UsdProblem, tol: float = PSD_TOL) -> SolutionReport:
    """Optimal measurement when the failure probability meets the
    fidelity bound.

    The conclusive elements sandwich the rank-condition operators
    between sqrt(state) and the state-sum pseudo-inverse. With unequal
    priors the operators carry the prior-ratio weight; since that
    extrapolates beyond the equal-prior display, the certificate gate
    is what makes the output trustworthy.
    """
    fd = fidelity_operators(p)
    rc = rank_condition_check(p, tol, fd=fd)
    if not rc.both_psd:
        raise RankConditionsFail(
            "rank-condition operators are not both PSD "
            f"(min eigenvalues {rc.op0_min_eig:.3e}, {rc.op1_min_eig:.3e})"
        )
    r0, r1 = p.rho0.matrix, p.rho1.matrix
    gamma = math.sqrt(p.eta1 / p.eta0)
    s0 = sqrt_psd(r0)
    s1 = sqrt_psd(r1)
    pinv = fd.sigma_pinv
    e0 = hermitize(pinv @ s0 @ (r0 - gamma * fd.f0) @ s0 @ pinv)
    e1 = hermitize(pinv @ s1 @ (r1 - fd.f1 / gamma) @ s1 @ pinv)
    eq = hermitize(np.eye(p.dim) - e0 - e1)
    m = Povm(e0=e0, e1=e1, eq=eq)
    q, q0, q1 = failure_probability(p, m)

    cert = build_fidelity_certificate(p)
    diagnostics = _gate_solution(p, m, cert)
    bound = 2.0 * math.sqrt(p.eta0 * p.eta1) * fd.fidelity
    diagnostics["fidelity"] = fd.fidelity
    diagnostics["bound_gap"] = q - bound
    diagnostics["op0_min_eig"] = rc.op0_min_eig
    diagnostics["op1_min_eig"] = rc.op1_min_eig
    return SolutionReport(
        q_opt=q, q0=q0, q1=q1, povm=m,
        branch=Branch.FIRST_CLASS_FIDELITY,
        diagnostics=diagnostics, certificate=cert,
    )


def _require_gu_4d(p: UsdProblem):
    """Shared preconditions for the involution-symmetric 4D solvers.

    Returns the two support decompositions and the involution.
    """
    if p.dim != 4:
        raise PreconditionFail(
            f"solver covers dimension 4 only, got {p.dim}", cause="dimension"
        )
    if abs(p.eta0 - p.eta1) > 1e-12:
        raise PreconditionFail(
            "solver requires equal priors", cause="priors"
        )
    if p.gu_involution is None:
        raise PreconditionFail(
            "problem declares no involution", cause="involution_missing"
        )
    gu = verify_gu_structure(p.rho0, p.rho1, p.gu_involution)
    if not gu.ok:
        raise PreconditionFail(
            f"involution structure invalid: {gu.failures}",
            cause="involution_invalid",
        )
    d0 = support_decomposition(p.rho0.matrix)
    d1 = support_decomposition(p.rho1.matrix)
    if d0.rank != 2 or d1.rank != 2:
        raise PreconditionFail(
            f"solver requires rank (2, 2), got ({d0.rank}, {d1.rank})", cause="rank"
        )
    if standard_form_report(p).supports_overlap:
        raise OverlappingSupports("state supports overlap")
    return d0, d1, np.asarray(p.gu_involution, dtype=complex)


def _kernel_compressed_involution(d1, u):
    return hermitize(d1.kernel_projector @ u @ d1.kernel_projector)


def _signed_kernel_eigs(k: np.ndarray):
    """Nonzero eigenpairs of the kernel-compressed involution, positive first."""
    sys = eigh(k)
    w = sys.eigenvalues
    amax = float(np.abs(w).max()) if w.size else 0.0
    mask = np.abs(w) > REL_CUTOFF * amax
    vals = w[mask]
    vecs = sys.eigenvectors[:, mask]
    order = np.argsort(-vals)
    return vals[order], vecs[:, order]


def solve_gu_4d(p: UsdProblem):
    """Optimal measurement for equal-prior involution pairs of rank 2
    in dimension 4.

    Returns (SolutionReport, GuSolution or None). When the fidelity
    bound is attainable the first-class construction is used and no
    GuSolution is produced. Otherwise the optimum is the rank-1
    projective measurement determined by the signed eigenpair of the
    kernel-compressed involution.
    """
    d0, d1, u = _require_gu_4d(p)
    fd = fidelity_operators(p)
    both_psd, mn = psd_check(p.rho0.matrix - fd.f0, PSD_TOL)
    if both_psd:
        report = solve_first_class(p)
        return report, None

    k = _kernel_compressed_involution(d1, u)
    vals, vecs = _signed_kernel_eigs(k)
    npos = int((vals > 0).sum())
    nneg = int((vals < 0).sum())
    if len(vals) != 2 or npos != 1 or nneg != 1:
        raise SpectrumAnomaly(
            "kernel-compressed involution should carry one positive and one "
            f"negative eigenvalue, found {np.round(vals, 12).tolist()} "
            f"(min eig of the fidelity-gap operator {mn:.3e})"
        )
    a = float(vals[0])
    b = float(-vals[1])
    v0 = vecs[:, 0]
    v1 = vecs[:, 1]
    r0 = p.rho0.matrix
    cross = complex(v0.conj() @ r0 @ v1)
    phase = 0.0 if abs(cross) <= 1e-12 else float(np.angle(cross)) % (2.0 * math.pi)
    x = (np.exp(1j * phase) * math.sqrt(b) * v0 + math.sqrt(a) * v1) / math.sqrt(a + b)
    e0 = np.outer(x, x.conj())
    e1 = hermitize(u @ e0 @ u)
    eq = hermitize(np.eye(4) - e0 - e1)
    m = Povm(e0=e0, e1=e1, eq=eq)

    success = float((x.conj() @ r0 @ x).real)
    expanded = (
        b * float((v0.conj() @ r0 @ v0).real)
        + a * float((v1.conj() @ r0 @ v1).real)
        + 2.0 * math.sqrt(a * b) * float((cross * np.exp(-1j * phase)).real)
    ) / (a + b)
    if abs(success - expanded) > 1e-10:
        raise SpectrumAnomaly(
            f"success probability cross-check failed: {success!r} vs {expanded!r}"
        )

    q, q0, q1 = failure_probability(p, m)
    cert = fit_certificate(p, m)
    if cert is None:
        raise CertificateRejected(
            "no certificate found for the projective construction",
            residuals={"q": q},
        )
    vrep = validate_povm(p, m)
    if not vrep.ok:
        raise CertificateRejected(
            f"constructed measurement failed validation: {vrep.failures}",
            residuals=vrep.residuals,
        )
    diagnostics = dict(vrep.residuals)
    diagnostics.update(cert.residuals)
    diagnostics["kernel_eig_pos"] = a
    diagnostics["kernel_eig_neg"] = -b
    diagnostics["success_crosscheck_gap"] = success - expanded
    report = SolutionReport(
        q_opt=q, q0=q0, q1=q1, povm=m,
        branch=Branch.GU_PROJECTIVE,
        diagnostics=diagnostics, certificate=cert,
    )
    solution = GuSolution(
        kernel_operator=k, a=a, b=b, phase=phase, x_vector=x
    )
    return report, solution


def gu_kernel_spectrum(p: UsdProblem) -> np.ndarray:
    """Nonzero eigenvalues of the kernel-compressed involution, sorted
    descending so the expected sign pattern reads (positive, negative)."""
    _, d1, u = _require_gu_4d(p)
    vals, _ = _signed_kernel_eigs(_kernel_compressed_involution(d1, u))
    return vals


def spectrum_negation_check(p: UsdProblem, tol: float = 1e-9) -> bool:
    """Whether the support and kernel compressions of the involution
    carry spectra that are negatives of each other."""
    if p.gu_involution is None:
        raise PreconditionFail(
            "problem declares no involution", cause="involution_missing"
        )
    u = np.asarray(p.gu_involution, dtype=complex)
    d0 = support_decomposition(p.rho0.matrix)
    inside = np.linalg.eigvalsh(hermitize(d0.support_projector @ u @ d0.support_projector))
    outside = np.linalg.eigvalsh(hermitize(d0.kernel_projector @ u @ d0.kernel_projector))
    amax = max(np.abs(inside).max(), np.abs(outside).max(), 0.0)
    s_in = np.sort(inside[np.abs(inside) > REL_CUTOFF * amax])
    s_out = np.sort(outside[np.abs(outside) > REL_CUTOFF * amax])
    if s_in.size != s_out.size:
        return False
    return bool(np.all(np.abs(s_in + s_out[::-1]) <= tol))


def projectivity_check(m: Povm, tol: float = 1e-9) -> ValidationReport:
    """Idempotence of all three elements, conclusive-element
    orthogonality, and the rank-2 inconclusive element."""
    rep = ValidationReport()
    rep.check("e0_idempotent", spectral_norm(m.e0 @ m.e0 - m.e0), tol)
    rep.check("e1_idempotent", spectral_norm(m.e1 @ m.e1 - m.e1), tol)
    rep.check("eq_idempotent", spectral_norm(m.eq @ m.eq - m.eq), tol)
    rep.check("e0_e1_orthogonal", abs(np.trace(m.e0 @ m.e1).real), tol)
    rank = support_decomposition(hermitize(m.eq)).rank
    rep.residuals["eq_rank"] = float(rank)
    if rank != 2:
        rep.failures.append("eq_rank")
    return rep


def _unit_eigenspace(a: np.ndarray) -> np.ndarray:
    sys = eigh(a)
    return sys.eigenvectors[:, sys.eigenvalues >= UNIT_EIG_THRESHOLD]


def _best_in_subspace(cols: np.ndarray, proj: np.ndarray):
    """Unit vector in span(cols) with maximal projection onto proj's range."""
    if cols.shape[1] == 0:
        return None, 0.0
    gram = hermitize(cols.conj().T @ proj @ cols)
    w, v = np.linalg.eigh(gram)
    vec = cols @ v[:, -1]
    vec = vec / np.linalg.norm(vec)
    return vec, math.sqrt(max(0.0, float(w[-1])))


def split_off_extraction(p: UsdProblem, m: Povm, tol: float = 1e-7):
    """Locate the two-dimensional subspace that an optimal measurement
    splits off when the rank conditions fail.

    The inconclusive element must fix a vector inside one state's
    support while the opposite conclusive element fixes a partner in
    that state's kernel. Returns the first verified pair or None; the
    measurement is assumed optimal for the problem.
    """
    rc = rank_condition_check(p)
    if rc.both_psd:
        return None
    eq_unit = _unit_eigenspace(m.eq)
    if eq_unit.shape[1] == 0:
        return None
    for host, partner in ((HostState.RHO0, m.e1), (HostState.RHO1, m.e0)):
        rho = p.rho0.matrix if host is HostState.RHO0 else p.rho1.matrix
        dec = support_decomposition(rho)
        e_vec, e_proj = _best_in_subspace(eq_unit, dec.support_projector)
        if e_vec is None or e_proj < 1.0 - tol:
            continue
        partner_unit = _unit_eigenspace(partner)
        ep_vec, ep_proj = _best_in_subspace(partner_unit, dec.kernel_projector)
        if ep_vec is None or ep_proj < 1.0 - tol:
            continue
        residuals = {
            "support_projection": 1.0 - e_proj,
            "kernel_projection": 1.0 - ep_proj,
            "orthogonality": abs(complex(e_vec.conj() @ ep_vec)),
            "eq_fixes_e": float(np.linalg.norm(m.eq @ e_vec - e_vec)),
            "partner_fixes_e_prime": float(np.linalg.norm(partner @ ep_vec - ep_vec)),
        }
        if residuals["orthogonality"] > 1e-9:
            continue
        if residuals["eq_fixes_e"] > 1e-8 or residuals["partner_fixes_e_prime"] > 1e-8:
            continue
        return SplitOffSubspace(
            e_vector=e_vec,
            e_prime_vector=ep_vec,
            host_state=host,
            residuals=residuals,
        )
    return None
