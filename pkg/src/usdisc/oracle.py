"""Brute-force numerical optimizer used to cross-check the analytic solvers.

The search runs projected gradient ascent on the success probability
over pairs (E0, E1) confined to the kernels of the opposite states,
which enforces the error-free conditions exactly. Feasibility (both
elements PSD, their sum capped by the identity) is restored after every
step by cyclic projection with correction buffers; the projection
accuracy is what ultimately limits the achievable objective accuracy,
so the final polish phase runs it much tighter than the exploratory
phase. All restarts advance together as one batched array.

This module must stay independent of the analytic solution formulas:
it exists to disagree with them when they are wrong.
"""

from dataclasses import dataclass

import numpy as np

from .errors import OverlappingSupports
from .linalg import support_decomposition
from .problem import Povm, UsdProblem, standard_form_report


@dataclass(frozen=True)
class OracleResult:
    best_povm: Povm
    best_q: float
    iterations: int
    converged: bool
    restarts_used: int


def _bherm(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def oracle_optimize(p: UsdProblem, restarts: int = 16, max_iters: int = 5000,
                    seed: int = 7, *, flight_iters: int = 400,
                    polish_iters: int = 1500, projection_cap: int = 400,
                    stall_window: int = 50, stall_rtol: float = 1e-10) -> OracleResult:
    """Maximize eta0 Tr(E0 rho0) + eta1 Tr(E1 rho1) by projected ascent.

    Deterministic for a fixed seed. Restarts are merged by best
    objective with ties going to the lowest restart index. Convergence
    means the polished leader's relative improvement stayed below
    stall_rtol over stall_window accepted steps.
    """
    if standard_form_report(p).supports_overlap:
        raise OverlappingSupports(
            "state supports overlap; no error-free measurement can succeed on both"
        )
    r0 = p.rho0.matrix
    r1 = p.rho1.matrix
    d = p.dim
    eye = np.eye(d)
    k0 = support_decomposition(r0).kernel_projector
    k1 = support_decomposition(r1).kernel_projector
    # ascent directions are constant: the objective is linear in (E0, E1)
    g0 = _bherm((k1 @ (p.eta0 * r0) @ k1)[None])[0]
    g1 = _bherm((k0 @ (p.eta1 * r1) @ k0)[None])[0]
    w0, w1 = p.eta0 * r0, p.eta1 * r1
    win = stall_window

    def clip_cone(a, kp):
        w, v = np.linalg.eigh(_bherm(kp @ a @ kp))
        return _bherm((v * np.clip(w, 0, None)[:, None, :]) @ np.conj(np.swapaxes(v, -1, -2)))

    def proj_sum(a0, a1):
        w, v = np.linalg.eigh(_bherm(a0 + a1 - eye))
        pos = np.clip(w, 0.0, None)
        exc = _bherm((v * pos[:, None, :]) @ np.conj(np.swapaxes(v, -1, -2)))
        return a0 - 0.5 * exc, a1 - 0.5 * exc

    def project(a0, a1, tol, cap):
        # cyclic projection with correction buffers; the final rescale
        # guarantees the sum cap holds exactly even when cap is hit
        x0, x1 = a0, a1
        u0 = np.zeros_like(a0)
        u1 = np.zeros_like(a1)
        v0 = np.zeros_like(a0)
        v1 = np.zeros_like(a1)
        for _ in range(cap):
            y0, y1 = proj_sum(x0 + u0, x1 + u1)
            u0 = x0 + u0 - y0
            u1 = x1 + u1 - y1
            px0, px1 = x0, x1
            x0 = clip_cone(y0 + v0, k1)
            x1 = clip_cone(y1 + v1, k0)
            v0 = y0 + v0 - x0
            v1 = y1 + v1 - x1
            if max(np.abs(x0 - px0).max(), np.abs(x1 - px1).max()) < tol:
                break
        wm = np.linalg.eigvalsh(_bherm(x0 + x1))[:, -1]
        s = 1.0 / np.maximum(1.0, wm)
        return x0 * s[:, None, None], x1 * s[:, None, None]

    def objective(a0, a1):
        return (np.einsum("rij,ji->r", a0, w0) + np.einsum("rij,ji->r", a1, w1)).real

    def climb(e0, e1, f, t, budget, rt, ptol, pcap):
        n = len(f)
        active = np.ones(n, bool)
        ring = np.tile(f, (win + 1, 1))
        acc_cnt = np.zeros(n, int)
        it = 0
        stalled = np.zeros(n, bool)
        while it < budget and active.any():
            it += 1
            c0 = e0 + t[:, None, None] * g0
            c1 = e1 + t[:, None, None] * g1
            c0, c1 = project(c0, c1, ptol, pcap)
            fn = objective(c0, c1)
            acc = (fn >= f) & active
            rej = (~acc) & active
            e0[acc], e1[acc], f[acc] = c0[acc], c1[acc], fn[acc]
            t[acc] = np.minimum(t[acc] * 1.5, 1e6)
            t[rej] *= 0.5
            acc_cnt[acc] += 1
            ring[acc_cnt[acc] % (win + 1), acc] = f[acc]
            chk = acc & (acc_cnt >= win)
            if chk.any():
                old = ring[(acc_cnt[chk] - win) % (win + 1), chk]
                stall = (f[chk] - old) < rt * np.maximum(1.0, np.abs(f[chk]))
                idx = np.flatnonzero(chk)
                active[idx[stall]] = False
                stalled[idx[stall]] = True
            floored = active & (t <= 1e-15)
            stalled |= floored
            active &= t > 1e-15
        return e0, e1, f, it, stalled

    rng = np.random.default_rng(seed)
    r = max(1, int(restarts))
    b0 = (rng.standard_normal((r, d, d)) + 1j * rng.standard_normal((r, d, d))) / np.sqrt(2)
    b1 = (rng.standard_normal((r, d, d)) + 1j * rng.standard_normal((r, d, d))) / np.sqrt(2)
    e0 = _bherm(k1 @ b0 @ np.conj(np.swapaxes(b0, -1, -2)) @ k1)
    e1 = _bherm(k0 @ b1 @ np.conj(np.swapaxes(b1, -1, -2)) @ k0)
    e0, e1 = project(e0, e1, 1e-10, min(60, projection_cap))
    f = objective(e0, e1)
    t = np.ones(r)
    flight = min(flight_iters, max_iters)
    e0, e1, f, it1, _ = climb(e0, e1, f, t, flight, stall_rtol, 1e-10, min(60, projection_cap))

    best = int(np.argmax(f))
    pe0, pe1, pf = e0[best:best + 1], e1[best:best + 1], f[best:best + 1]
    budget = min(polish_iters, max_iters)
    pe0, pe1, pf, it2, stalled = climb(
        pe0, pe1, pf, np.ones(1), budget, 1e-12, 1e-15, projection_cap
    )
    pe0, pe1 = project(pe0, pe1, 1e-16, max(projection_cap, 1000))

    e0f = pe0[0]
    e1f = pe1[0]
    eqf = _bherm((eye - e0f - e1f)[None])[0]
    best_q = float(1.0 - objective(pe0, pe1)[0])
    return OracleResult(
        best_povm=Povm(e0=e0f, e1=e1f, eq=eqf),
        best_q=min(1.0, max(0.0, best_q)),
        iterations=it1 + it2,
        converged=bool(stalled[0]),
        restarts_used=r,
    )
