"""Fidelity operators and the failure-probability bounds built on them.

The two operators sqrt(sqrt(rho0) rho1 sqrt(rho0)) and its mirror share
a trace, the fidelity F, which caps how well any error-free measurement
can do: the inconclusive probability can never drop below
2 sqrt(eta0 eta1) F. Whether that cap is attained is decided by the two
rank-condition operators tested here.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBound, DomainError, OverlappingSupports, PreconditionFail
from .linalg import (
    PSD_TOL,
    REL_CUTOFF,
    hermitize,
    pseudo_inverse,
    psd_check,
    sqrt_psd,
    support_decomposition,
)
from .problem import UsdProblem, standard_form_report


@dataclass(frozen=True)
class FidelityData:
    f0: np.ndarray
    f1: np.ndarray
    fidelity: float
    sigma: np.ndarray
    sigma_pinv: np.ndarray


@dataclass(frozen=True)
class RankConditionReport:
    op0_min_eig: float
    op1_min_eig: float
    both_psd: bool


def fidelity_operators(p: UsdProblem) -> FidelityData:
    """Both fidelity operators, their shared trace, and the state-sum
    pseudo-inverse used by the measurement formulas.

    The mirror trace is computed independently and cross checked rather
    than assumed equal; a mismatch means the eigensolver drifted.
    """
    r0, r1 = p.rho0.matrix, p.rho1.matrix
    s0 = sqrt_psd(r0)
    s1 = sqrt_psd(r1)
    f0 = sqrt_psd(hermitize(s0 @ r1 @ s0))
    f1 = sqrt_psd(hermitize(s1 @ r0 @ s1))
    t0 = float(np.trace(f0).real)
    t1 = float(np.trace(f1).real)
    if abs(t0 - t1) > 1e-9:
        raise DomainError(
            f"fidelity operator traces disagree: {t0!r} vs {t1!r}"
        )
    sigma = hermitize(r0 + r1)
    return FidelityData(
        f0=f0,
        f1=f1,
        fidelity=t0,
        sigma=sigma,
        sigma_pinv=pseudo_inverse(sigma),
    )


def failure_lower_bound(p: UsdProblem) -> float:
    """2 sqrt(eta0 eta1) F, clamped into [0, 1]."""
    fd = fidelity_operators(p)
    return min(1.0, max(0.0, 2.0 * math.sqrt(p.eta0 * p.eta1) * fd.fidelity))


def rank_condition_check(p: UsdProblem, tol: float = PSD_TOL,
                         fd: FidelityData = None) -> RankConditionReport:
    """Minimum eigenvalues of the two operators whose joint positivity
    marks the regime where the fidelity bound is attained."""
    report = standard_form_report(p)
    if report.supports_overlap:
        raise OverlappingSupports(
            "state supports overlap; reduce the problem before testing rank conditions"
        )
    if fd is None:
        fd = fidelity_operators(p)
    gamma = math.sqrt(p.eta1 / p.eta0)
    ok0, mn0 = psd_check(p.rho0.matrix - gamma * fd.f0, tol)
    ok1, mn1 = psd_check(p.rho1.matrix - fd.f1 / gamma, tol)
    return RankConditionReport(op0_min_eig=mn0, op1_min_eig=mn1, both_psd=ok0 and ok1)


def prior_regime_bounds(p: UsdProblem, fd: FidelityData = None):
    """The prior-ratio window inside which both rank conditions can hold.

    Returns (low, high, ratio, inside) where ratio = sqrt(eta1/eta0).
    """
    if fd is None:
        fd = fidelity_operators(p)
    if fd.fidelity <= 0.0:
        raise DegenerateBound(
            "states are perfectly distinguishable; the prior window is vacuous"
        )
    p0 = support_decomposition(p.rho0.matrix).support_projector
    p1 = support_decomposition(p.rho1.matrix).support_projector
    low = float(np.trace(p1 @ p.rho0.matrix).real) / fd.fidelity
    denom = float(np.trace(p0 @ p.rho1.matrix).real)
    high = math.inf if denom <= 0.0 else fd.fidelity / denom
    ratio = math.sqrt(p.eta1 / p.eta0)
    return low, high, ratio, bool(low <= ratio <= high)


def tighter_q0_bound(p: UsdProblem, rel_cutoff: float = REL_CUTOFF):
    """Sharpened floor on the state-0 inconclusive probability for
    symmetric measurements on a standard-form pair.

    Returns (bound, lambda_min) where lambda_min is the smallest
    non-vanishing eigenvalue of the kernel-compressed state
    P1_perp rho0 P1_perp. The same relative cutoff that defines ranks
    decides which eigenvalues count as vanishing.
    """
    if p.gu_involution is None:
        raise PreconditionFail(
            "bound is derived for symmetric measurements; the problem "
            "declares no involution",
            cause="gu_involution",
        )
    d1 = support_decomposition(p.rho1.matrix, rel_cutoff)
    k1 = d1.kernel_projector
    compressed = hermitize(k1 @ p.rho0.matrix @ k1)
    w = np.linalg.eigvalsh(compressed)
    lmax = float(w[-1]) if w.size else 0.0
    nonzero = w[w > rel_cutoff * max(lmax, 0.0)]
    if nonzero.size == 0:
        raise DegenerateBound("kernel-compressed state vanishes; bound undefined")
    lambda_min = float(nonzero[0])
    overlap = float(np.trace(d1.support_projector @ p.rho0.matrix).real)
    return p.eta0 * overlap / (1.0 - lambda_min / 2.0), lambda_min
