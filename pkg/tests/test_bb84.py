import numpy as np
import pytest

from usdisc import Branch, UsdProblem, validate_problem, verify_gu_structure
from usdisc.bb84 import (
    Bb84SweepRow,
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
from usdisc.errors import DomainError
from usdisc.linalg import eigh, hermitize
from usdisc import fidelity_operators

GRID = [round(0.05 * k, 2) for k in range(1, 61)]


def test_coefficients_are_normalized():
    for mu in (0.05, 0.5, 1.7, 3.0):
        c = coefficients(mu).c
        assert sum(x * x for x in c) == pytest.approx(1.0, abs=1e-12)
        assert all(x >= 0 for x in c)


def test_coefficients_small_mu_limit():
    c = coefficients(1e-9).c
    np.testing.assert_allclose(c, [1.0, 0.0, 0.0, 0.0], atol=1e-4)


def test_coefficients_reject_negative_mu():
    with pytest.raises(DomainError):
        coefficients(-0.1)


def test_build_states_reject_nonpositive_mu():
    with pytest.raises(DomainError):
        build_states(0.0)


def test_built_states_are_unit_trace_psd_rank_2():
    for mu in (0.1, 0.9, 2.5):
        st = build_states(mu)
        for dm in (st.rho_r, st.rho_i, st.rho_0, st.rho_1):
            assert np.trace(dm.matrix).real == pytest.approx(1.0, abs=1e-12)
            assert np.linalg.eigvalsh(dm.matrix)[0] >= -1e-12
            assert dm.declared_rank == 2


def test_both_pairs_validate_and_carry_involutions():
    for mu in GRID[::6]:
        pb = basis_problem(mu)
        pt = bit_problem(mu)
        for p in (pb, pt):
            assert validate_problem(p).ok
            assert verify_gu_structure(p.rho0, p.rho1, p.gu_involution).ok


def test_basis_fidelity_closed_form():
    # F = |c0^2 - c2^2| + |c1^2 - c3^2| for the basis-value pair
    for mu in GRID[::5]:
        st = build_states(mu)
        c = coefficients(mu).c
        expected = abs(c[0] ** 2 - c[2] ** 2) + abs(c[1] ** 2 - c[3] ** 2)
        fd = fidelity_operators(basis_problem(mu))
        assert fd.fidelity == pytest.approx(expected, abs=1e-10)


def test_bit_fidelity_is_exponential():
    for mu in GRID[::5]:
        fd = fidelity_operators(bit_problem(mu))
        assert fd.fidelity == pytest.approx(np.exp(-mu), abs=1e-9)


def test_q_basis_closed_form_values():
    assert q_basis_closed_form(1.0) == pytest.approx(
        np.exp(-1.0) * (abs(np.cos(1.0)) + abs(np.sin(1.0))), abs=1e-15
    )


def test_bit_spectrum_closed_form_tracks_numerics():
    for mu in (0.25, 0.8, 1.6):
        p = bit_problem(mu)
        fd = fidelity_operators(p)
        w = np.sort(eigh(hermitize(p.rho0.matrix - fd.f0)).eigenvalues)
        lam_plus, lam_minus = bit_spectrum_closed_form(mu)
        np.testing.assert_allclose(
            w, np.sort([lam_minus, 0.0, 0.0, lam_plus]), atol=1e-8
        )


def test_locate_threshold_converges():
    mu0, iterations = locate_threshold()
    assert 0.7188 <= mu0 <= 0.7198
    assert iterations < 100
    assert find_mu0() == mu0


def test_sweep_rows_are_ordered_and_consistent():
    rows = list(sweep(0.1, 0.6, 0.1))
    assert [round(r.mu, 10) for r in rows] == [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]
    for r in rows:
        assert isinstance(r, Bb84SweepRow)
        assert r.q_basis == pytest.approx(q_basis_closed_form(r.mu), abs=1e-8)
        # below the threshold the rank condition fails and the branch flips
        assert (r.min_eig_rho0_minus_f0 < 0) == (r.branch_bit is Branch.GU_PROJECTIVE)


def test_sweep_deterministic():
    a = sweep_csv(list(sweep(0.2, 1.0, 0.2)))
    b = sweep_csv(list(sweep(0.2, 1.0, 0.2)))
    assert a == b


def test_sweep_csv_shape():
    text = sweep_csv(list(sweep(0.3, 0.5, 0.1)))
    lines = text.splitlines()
    assert lines[0] == "mu,q_basis,q_bit,branch_bit,min_eig"
    assert len(lines) == 4
    first = lines[1].split(",")
    assert first[0] == "0.3"
    assert first[3] in ("GuProjective", "FirstClassFidelity")
    # 12 significant digits on numeric columns
    assert len(first[1].replace(".", "").replace("-", "").lstrip("0")) <= 12
    assert text.endswith("\n")
