"""JSON encoding of problems, measurements, certificates and reports.

Matrices travel as paired real arrays "re" and "im". Serialization is
deterministic: keys are sorted and floats use the shortest round-trip
decimal form, so identical inputs give byte-identical documents.
"""

import json

import numpy as np

from .certificates import OptimalityCertificate
from .errors import ProblemFormatError
from .problem import DensityMatrix, Povm, UsdProblem
from .solvers import Branch, SolutionReport


def matrix_to_obj(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_obj(obj, dim: int, field: str) -> np.ndarray:
    if not isinstance(obj, dict) or "re" not in obj or "im" not in obj:
        raise ProblemFormatError(f"{field}: expected an object with 're' and 'im' arrays")
    try:
        re = np.array(obj["re"], dtype=float)
        im = np.array(obj["im"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"{field}: non-numeric entries ({exc})") from exc
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ProblemFormatError(
            f"{field}: expected shape ({dim}, {dim}), got re {re.shape} and im {im.shape}"
        )
    return re + 1j * im


def problem_to_obj(p: UsdProblem) -> dict:
    obj = {
        "dim": p.dim,
        "eta0": p.eta0,
        "eta1": p.eta1,
        "rho0": matrix_to_obj(p.rho0.matrix),
        "rho1": matrix_to_obj(p.rho1.matrix),
    }
    if p.gu_involution is not None:
        obj["u"] = matrix_to_obj(p.gu_involution)
    return obj


def problem_from_obj(obj, renormalize: bool = False) -> UsdProblem:
    if not isinstance(obj, dict):
        raise ProblemFormatError("problem document must be an object")
    for key in ("dim", "eta0", "eta1", "rho0", "rho1"):
        if key not in obj:
            raise ProblemFormatError(f"missing required field '{key}'")
    dim = obj["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise ProblemFormatError(f"dim: expected a positive integer, got {dim!r}")
    for key in ("eta0", "eta1"):
        if not isinstance(obj[key], (int, float)) or isinstance(obj[key], bool):
            raise ProblemFormatError(f"{key}: expected a number, got {obj[key]!r}")
    rho0 = matrix_from_obj(obj["rho0"], dim, "rho0")
    rho1 = matrix_from_obj(obj["rho1"], dim, "rho1")
    u = matrix_from_obj(obj["u"], dim, "u") if "u" in obj else None
    try:
        d0 = DensityMatrix.from_matrix(rho0, renormalize=renormalize)
        d1 = DensityMatrix.from_matrix(rho1, renormalize=renormalize)
    except Exception as exc:
        raise ProblemFormatError(str(exc)) from exc
    return UsdProblem(
        rho0=d0, rho1=d1,
        eta0=float(obj["eta0"]), eta1=float(obj["eta1"]),
        gu_involution=u,
    )


def povm_to_obj(m: Povm) -> dict:
    return {
        "e0": matrix_to_obj(m.e0),
        "e1": matrix_to_obj(m.e1),
        "eq": matrix_to_obj(m.eq),
    }


def povm_from_obj(obj, dim: int) -> Povm:
    if not isinstance(obj, dict):
        raise ProblemFormatError("povm: expected an object")
    for key in ("e0", "e1", "eq"):
        if key not in obj:
            raise ProblemFormatError(f"povm: missing element '{key}'")
    return Povm(
        e0=matrix_from_obj(obj["e0"], dim, "povm.e0"),
        e1=matrix_from_obj(obj["e1"], dim, "povm.e1"),
        eq=matrix_from_obj(obj["eq"], dim, "povm.eq"),
    )


def certificate_to_obj(c: OptimalityCertificate) -> dict:
    return {
        "z": matrix_to_obj(c.z),
        "residuals": {k: float(v) for k, v in c.residuals.items()},
        "success_trace": c.success_trace,
    }


def certificate_from_obj(obj, dim: int) -> OptimalityCertificate:
    if not isinstance(obj, dict) or "z" not in obj:
        raise ProblemFormatError("certificate: expected an object with a 'z' matrix")
    z = matrix_from_obj(obj["z"], dim, "certificate.z")
    return OptimalityCertificate(
        z=z,
        residuals=dict(obj.get("residuals", {})),
        success_trace=float(obj.get("success_trace", np.trace(z).real)),
    )


def report_to_obj(p: UsdProblem, report: SolutionReport) -> dict:
    obj = {
        "problem": problem_to_obj(p),
        "q_opt": report.q_opt,
        "q0": report.q0,
        "q1": report.q1,
        "branch": report.branch.value,
        "povm": povm_to_obj(report.povm),
        "diagnostics": {k: float(v) for k, v in report.diagnostics.items()},
    }
    if report.certificate is not None:
        obj["certificate"] = certificate_to_obj(report.certificate)
    return obj


def report_from_obj(obj):
    """Decode a solve report back into (problem, report) for re-checking."""
    if not isinstance(obj, dict) or "problem" not in obj:
        raise ProblemFormatError("report document must contain a 'problem' object")
    p = problem_from_obj(obj["problem"])
    for key in ("q_opt", "q0", "q1", "branch", "povm"):
        if key not in obj:
            raise ProblemFormatError(f"report: missing field '{key}'")
    try:
        branch = Branch(obj["branch"])
    except ValueError as exc:
        raise ProblemFormatError(f"report: unknown branch {obj['branch']!r}") from exc
    cert = None
    if "certificate" in obj:
        cert = certificate_from_obj(obj["certificate"], p.dim)
    report = SolutionReport(
        q_opt=float(obj["q_opt"]),
        q0=float(obj["q0"]),
        q1=float(obj["q1"]),
        povm=povm_from_obj(obj["povm"], p.dim),
        branch=branch,
        diagnostics=dict(obj.get("diagnostics", {})),
        certificate=cert,
    )
    return p, report


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
