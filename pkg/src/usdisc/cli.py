"""Command-line surface for solving, certifying and sweeping.

Exit codes: 0 on success, 1 when the input or a precondition is at
fault, 2 when a numerical construction fails internally. Identical
invocations produce byte-identical output.
"""

import argparse
import sys

from . import bb84, serialize
from .bounds import rank_condition_check
from .certificates import fit_certificate, verify_certificate
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
from .linalg import PSD_TOL, REL_CUTOFF
from .oracle import oracle_optimize
from .problem import failure_probability, validate_problem
from .solvers import Branch, SolutionReport, solve_first_class, solve_gu_4d

_VALIDATION_ERRORS = (
    ProblemFormatError,
    DomainError,
    PreconditionFail,
    OverlappingSupports,
    RankConditionsFail,
)
_NUMERICAL_ERRORS = (
    CertificateRejected,
    SpectrumAnomaly,
    EigenDecompositionError,
    NotPositiveSemidefinite,
    BracketFail,
    DegenerateBound,
)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; keep 2 reserved for
    # numerical failures
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="usdisc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(sp, needs_input):
        if needs_input:
            sp.add_argument("--input", required=True, help="problem or report file")
        sp.add_argument("--output", help="write result here instead of stdout")

    def add_tols(sp):
        sp.add_argument("--tol-psd", type=float, default=PSD_TOL)
        sp.add_argument("--tol-rank", type=float, default=REL_CUTOFF)

    sp = sub.add_parser("solve", help="optimal measurement for a problem file")
    add_io(sp, True)
    add_tols(sp)
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--restarts", type=int, default=16)
    sp.add_argument("--renormalize", action="store_true",
                    help="rescale input states to unit trace")

    sp = sub.add_parser("certify", help="re-verify a solve report")
    add_io(sp, True)
    add_tols(sp)

    sp = sub.add_parser("oracle", help="numerical optimization only")
    add_io(sp, True)
    add_tols(sp)
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--restarts", type=int, default=16)
    sp.add_argument("--renormalize", action="store_true")

    sp = sub.add_parser("bb84-sweep", help="failure-probability table over photon numbers")
    add_io(sp, False)
    sp.add_argument("--mu-start", type=float, default=bb84.DEFAULT_GRID[0])
    sp.add_argument("--mu-end", type=float, default=bb84.DEFAULT_GRID[1])
    sp.add_argument("--mu-step", type=float, default=bb84.DEFAULT_GRID[2])

    sp = sub.add_parser("bb84-mu0", help="threshold photon number")
    add_io(sp, False)
    return parser


def _emit(text: str, output_path):
    if output_path:
        with open(output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_problem(args):
    with open(args.input, "r", encoding="utf-8") as fh:
        obj = serialize.loads(fh.read())
    p = serialize.problem_from_obj(obj, renormalize=getattr(args, "renormalize", False))
    rep = validate_problem(p, tol_psd=args.tol_psd, tol_rank=args.tol_rank)
    if not rep.ok:
        details = ", ".join(
            f"{name} (residual {rep.residuals[name]:.3e})" for name in rep.failures
        )
        raise ProblemFormatError(f"problem fails validation: {details}")
    return p


def _solve_route(p, args) -> SolutionReport:
    if p.gu_involution is not None and p.dim == 4 and abs(p.eta0 - p.eta1) <= 1e-12:
        try:
            report, _ = solve_gu_4d(p)
            return report
        except PreconditionFail:
            pass
    try:
        return solve_first_class(p, tol=args.tol_psd)
    except RankConditionsFail:
        result = oracle_optimize(p, restarts=args.restarts, seed=args.seed)
        q, q0, q1 = failure_probability(p, result.best_povm)
        cert = fit_certificate(p, result.best_povm)
        diagnostics = {
            "oracle_iterations": float(result.iterations),
            "oracle_converged": float(result.converged),
            "oracle_restarts": float(result.restarts_used),
        }
        return SolutionReport(
            q_opt=q, q0=q0, q1=q1,
            povm=result.best_povm,
            branch=Branch.ORACLE_ONLY,
            diagnostics=diagnostics,
            certificate=cert,
        )


def _cmd_solve(args) -> int:
    p = _load_problem(args)
    report = _solve_route(p, args)
    _emit(serialize.dumps(serialize.report_to_obj(p, report)), args.output)
    return 0


def _cmd_certify(args) -> int:
    with open(args.input, "r", encoding="utf-8") as fh:
        obj = serialize.loads(fh.read())
    p, report = serialize.report_from_obj(obj)
    if report.certificate is None:
        raise ProblemFormatError("report carries no certificate to verify")
    rep = verify_certificate(p, report.povm, report.certificate)
    lines = [f"{name}: {value:.6e}" for name, value in sorted(rep.residuals.items())]
    lines.append("PASS" if rep.ok else "FAIL: " + ", ".join(rep.failures))
    _emit("\n".join(lines) + "\n", args.output)
    return 0 if rep.ok else 1


def _cmd_oracle(args) -> int:
    p = _load_problem(args)
    result = oracle_optimize(p, restarts=args.restarts, seed=args.seed)
    q, q0, q1 = failure_probability(p, result.best_povm)
    obj = {
        "best_q": result.best_q,
        "q0": q0,
        "q1": q1,
        "iterations": result.iterations,
        "converged": result.converged,
        "restarts_used": result.restarts_used,
        "povm": serialize.povm_to_obj(result.best_povm),
    }
    _emit(serialize.dumps(obj), args.output)
    return 0


def _cmd_sweep(args) -> int:
    rows = bb84.sweep(args.mu_start, args.mu_end, args.mu_step)
    _emit(bb84.sweep_csv(rows), args.output)
    return 0


def _cmd_mu0(args) -> int:
    _emit(f"{bb84.find_mu0():.12g}\n", args.output)
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "certify": _cmd_certify,
    "oracle": _cmd_oracle,
    "bb84-sweep": _cmd_sweep,
    "bb84-mu0": _cmd_mu0,
}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors; --help also lands here, carrying code 0
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except _VALIDATION_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: cannot read {exc.filename}\n")
        return 1
    except _NUMERICAL_ERRORS as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2
    except UsdError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
