"""Weak-coherent-pulse discrimination curves for the four-state protocol.

Two eavesdropping questions reduce to two-state discrimination at each
mean photon number mu. Which basis was used: a first-class problem
whose failure probability has a closed form for every mu. Which bit was
sent: an involution-symmetric problem that changes solution family at a
threshold photon number, located here by bisection on the closed-form
spectrum.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketFail, DomainError, UsdError
from .problem import DensityMatrix, UsdProblem, verify_gu_structure
from .solvers import Branch, solve_first_class, solve_gu_4d
from .bounds import fidelity_operators
from .linalg import psd_check

MU0_BRACKET = (0.1, 2.0)
DEFAULT_GRID = (0.05, 3.0, 0.05)


@dataclass(frozen=True)
class CoherentBb84Model:
    mu: float
    c: tuple


@dataclass(frozen=True)
class Bb84States:
    rho_r: DensityMatrix
    rho_i: DensityMatrix
    rho_0: DensityMatrix
    rho_1: DensityMatrix
    u_basis: np.ndarray
    u_bit: np.ndarray


@dataclass(frozen=True)
class Bb84SweepRow:
    mu: float
    q_basis: float
    q_bit: float
    branch_bit: Branch
    min_eig_rho0_minus_f0: float


def coefficients(mu: float) -> CoherentBb84Model:
    """Amplitudes of the four phase-superposition components.

    Their squares sum to one for every mu, which is what normalizes the
    states built from them.
    """
    if mu < 0:
        raise DomainError(f"mean photon number must be nonnegative, got {mu!r}")
    pref = math.exp(-mu / 2.0) / math.sqrt(2.0)
    c0 = pref * math.sqrt(math.cosh(mu) + math.cos(mu))
    c1 = pref * math.sqrt(math.sinh(mu) + math.sin(mu))
    c2 = pref * math.sqrt(math.cosh(mu) - math.cos(mu))
    # sinh(mu) - sin(mu) is nonnegative but underflows to tiny negatives
    c3 = pref * math.sqrt(max(math.sinh(mu) - math.sin(mu), 0.0))
    return CoherentBb84Model(mu=mu, c=(c0, c1, c2, c3))


def build_states(mu: float) -> Bb84States:
    """The two basis-question states, the two bit-question states, and
    the involutions relating each pair. Both conjugation identities are
    verified at 1e-12 before returning."""
    if mu <= 0:
        raise DomainError(f"mean photon number must be positive, got {mu!r}")
    c0, c1, c2, c3 = coefficients(mu).c
    rho_r = np.array(
        [
            [c0 * c0, 0.0, c0 * c2, 0.0],
            [0.0, c1 * c1, 0.0, c1 * c3],
            [c0 * c2, 0.0, c2 * c2, 0.0],
            [0.0, c1 * c3, 0.0, c3 * c3],
        ],
        dtype=complex,
    )
    u_basis = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
    rho_i = u_basis @ rho_r @ u_basis

    pm = (1.0 - 1j) / 2.0
    mp = (1.0 + 1j) / 2.0
    rho_0 = np.array(
        [
            [c0 * c0, pm * c0 * c1, 0.0, mp * c0 * c3],
            [mp * c1 * c0, c1 * c1, pm * c1 * c2, 0.0],
            [0.0, mp * c2 * c1, c2 * c2, pm * c2 * c3],
            [pm * c3 * c0, 0.0, mp * c3 * c2, c3 * c3],
        ],
        dtype=complex,
    )
    u_bit = np.diag([1.0, -1.0, 1.0, -1.0]).astype(complex)
    rho_1 = u_bit @ rho_0 @ u_bit

    states = Bb84States(
        rho_r=DensityMatrix.from_matrix(rho_r, declared_rank=2),
        rho_i=DensityMatrix.from_matrix(rho_i, declared_rank=2),
        rho_0=DensityMatrix.from_matrix(rho_0, declared_rank=2),
        rho_1=DensityMatrix.from_matrix(rho_1, declared_rank=2),
        u_basis=u_basis,
        u_bit=u_bit,
    )
    for name, pair, u in (
        ("basis", (states.rho_r, states.rho_i), u_basis),
        ("bit", (states.rho_0, states.rho_1), u_bit),
    ):
        rep = verify_gu_structure(pair[0], pair[1], u, tol=1e-12)
        if not rep.ok:
            raise DomainError(
                f"{name}-pair involution identity violated at mu={mu!r}: {rep.failures}"
            )
    return states


def basis_problem(mu: float) -> UsdProblem:
    s = build_states(mu)
    return UsdProblem(rho0=s.rho_r, rho1=s.rho_i, eta0=0.5, eta1=0.5,
                      gu_involution=s.u_basis)


def bit_problem(mu: float) -> UsdProblem:
    s = build_states(mu)
    return UsdProblem(rho0=s.rho_0, rho1=s.rho_1, eta0=0.5, eta1=0.5,
                      gu_involution=s.u_bit)


def q_basis_closed_form(mu: float) -> float:
    if mu < 0:
        raise DomainError(f"mean photon number must be nonnegative, got {mu!r}")
    return math.exp(-mu) * (abs(math.cos(mu)) + abs(math.sin(mu)))


def bit_spectrum_closed_form(mu: float):
    """Both eigenvalues of the bit-pair fidelity-gap operator; the lower
    one changes sign exactly at the threshold photon number."""
    if mu < 0:
        raise DomainError(f"mean photon number must be nonnegative, got {mu!r}")
    root = math.sqrt(1.0 + math.exp(2.0 * mu) - 2.0 * math.exp(mu) * math.cos(2.0 * mu))
    lam_plus = 0.5 * (1.0 - math.exp(-mu) + math.exp(-2.0 * mu) * root)
    lam_minus = 0.5 * (1.0 - math.exp(-mu) - math.exp(-2.0 * mu) * root)
    return lam_plus, lam_minus


def locate_threshold(tol: float = 1e-9, max_iters: int = 100):
    """Bisect the closed-form lower eigenvalue for its root.

    Returns (threshold, iterations used).
    """
    lo, hi = MU0_BRACKET
    flo = bit_spectrum_closed_form(lo)[1]
    fhi = bit_spectrum_closed_form(hi)[1]
    if flo >= 0 or fhi <= 0:
        raise BracketFail(
            f"no sign change on [{lo}, {hi}]: f(lo)={flo:.3e}, f(hi)={fhi:.3e}"
        )
    iterations = 0
    while hi - lo > tol and iterations < max_iters:
        iterations += 1
        mid = 0.5 * (lo + hi)
        if bit_spectrum_closed_form(mid)[1] < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), iterations


def find_mu0(tol: float = 1e-9) -> float:
    """Threshold photon number where the bit-value problem switches
    solution family."""
    return locate_threshold(tol)[0]


def sweep(mu_start: float = DEFAULT_GRID[0], mu_end: float = DEFAULT_GRID[1],
          step: float = DEFAULT_GRID[2]):
    """Failure probabilities of both questions across a photon-number grid.

    Every basis-question value is checked against its closed form at
    1e-8 before the row is emitted.
    """
    if not (0 < mu_start < mu_end) or step <= 0:
        raise DomainError(
            f"grid must satisfy 0 < start < end and step > 0, got "
            f"({mu_start!r}, {mu_end!r}, {step!r})"
        )
    count = int(math.floor((mu_end - mu_start) / step + 1e-9)) + 1
    rows = []
    for i in range(count):
        mu = mu_start + i * step
        try:
            basis_report = solve_first_class(basis_problem(mu))
            closed = q_basis_closed_form(mu)
            if abs(basis_report.q_opt - closed) > 1e-8:
                raise UsdError(
                    f"basis failure probability {basis_report.q_opt!r} deviates "
                    f"from closed form {closed!r}"
                )
            bit = bit_problem(mu)
            bit_report, _ = solve_gu_4d(bit)
            fd = fidelity_operators(bit)
            _, min_eig = psd_check(bit.rho0.matrix - fd.f0)
        except UsdError as exc:
            raise type(exc)(f"sweep failed at mu={mu!r}: {exc}") from exc
        rows.append(
            Bb84SweepRow(
                mu=mu,
                q_basis=basis_report.q_opt,
                q_bit=bit_report.q_opt,
                branch_bit=bit_report.branch,
                min_eig_rho0_minus_f0=min_eig,
            )
        )
    return rows


def sweep_csv(rows) -> str:
    """Serialize sweep rows with the fixed header and 12 significant digits."""
    lines = ["mu,q_basis,q_bit,branch_bit,min_eig"]
    for r in rows:
        lines.append(
            f"{r.mu:.12g},{r.q_basis:.12g},{r.q_bit:.12g},"
            f"{r.branch_bit.value},{r.min_eig_rho0_minus_f0:.12g}"
        )
    return "\n".join(lines) + "\n"
