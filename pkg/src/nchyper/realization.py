"""Norms of multi-analytic operators through tree-indexed state-space systems.

The operators of interest (``C_A C_B^{-1}``, the intertwiner, the
characteristic function) all act on sequences indexed by words and have a
finite realization

    x_{w g_j} = state[j] x_w + inp[j] u_w,      y_w = out x_w + feed u_w,

started from ``x_root = 0`` (or from a free initial state ``h``, in which case
the operator is the block ``[[I, 0], [free response, input response]]``).

Subtrees of different nodes are disjoint, so the supremum of
``sum ||y||^2 - c^2 sum ||u||^2`` over the levels ``<= K`` is computed exactly
by a Riccati recursion on ``s x s`` matrices, one step per level.  That gives
the norm of the level-K compression by bisection on ``c``.  The norm of the
full operator is the optimal value of the matching linear matrix inequality
(a storage-function certificate), solved as a small semidefinite program.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .numlin import hermitian_part

log = logging.getLogger(__name__)

BISECT_RTOL = 1e-13
SDP_TOL = 1e-10
CERT_TOL = 1e-7


@dataclass(frozen=True)
class TreeSystem:
    state: np.ndarray  # (n, s, s)
    inp: np.ndarray    # (n, s, m)
    out: np.ndarray    # (p, s)
    feed: np.ndarray   # (p, m)
    initial: bool = False  # free initial state, operator [[I,0],[free, input]]

    @property
    def n(self):
        return self.state.shape[0]

    @property
    def s(self):
        return self.state.shape[1]

    @property
    def m(self):
        return self.feed.shape[1]


@dataclass(frozen=True)
class NormResult:
    value: float
    lmi_residual: float  # min eigenvalue of the certificate LMI at the solution (>= -tol)
    storage: np.ndarray | None = None

    def __float__(self):
        return self.value


def _riccati_step(sys: TreeSystem, H: np.ndarray, c2: float):
    """One Bellman step; returns the new storage matrix or None if unbounded."""
    A, Bm, C, D = sys.state, sys.inp, sys.out, sys.feed
    BH = np.einsum("jsm,st->jmt", Bm.conj(), H)  # B_j^* H
    N = c2 * np.eye(sys.m) - D.conj().T @ D - np.einsum("jmt,jtk->mk", BH, Bm)
    N = hermitian_part(N)
    try:
        L = np.linalg.cholesky(N)
    except np.linalg.LinAlgError:
        return None
    G = D.conj().T @ C + np.einsum("jmt,jts->ms", BH, A)
    Z = np.linalg.solve(L, G)
    AHA = np.einsum("jts,tu,juv->sv", A.conj(), H, A)
    return hermitian_part(C.conj().T @ C + AHA + Z.conj().T @ Z)


def horizon_storage(sys: TreeSystem, c: float, levels: int):
    """Storage matrix after ``levels`` Bellman steps, or None if the gain exceeds c."""
    H = np.zeros((sys.s, sys.s), dtype=complex)
    c2 = c * c
    for _ in range(levels):
        H = _riccati_step(sys, H, c2)
        if H is None:
            return None
    return H


def _horizon_ok(sys: TreeSystem, c: float, K: int) -> bool:
    H = horizon_storage(sys, c, K + 1)
    if H is None:
        return False
    if sys.initial:
        lam = np.linalg.eigvalsh((c * c - 1) * np.eye(sys.s) - H)
        return bool(lam.min() >= 0)
    return True


def truncated_norm(sys: TreeSystem, K: int, rtol: float = BISECT_RTOL) -> float:
    """Norm of the operator compressed to words of length ``<= K``."""
    if K < 0:
        raise ValidationError("K must be nonnegative")
    lo = 1.0 if sys.initial else 0.0
    lo = max(lo, float(np.linalg.norm(sys.feed, 2)))
    hi = max(2.0 * lo, 1.0)
    while not _horizon_ok(sys, hi, K):
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            raise NumericalError("truncated norm exceeds 1e12")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if _horizon_ok(sys, mid, K):
            hi = mid
        else:
            lo = mid
    return hi


def cp_spectral_radius(state: np.ndarray) -> float:
    """Spectral radius of ``H -> sum_j state_j^* H state_j``."""
    M = sum(np.kron(a.conj().T, a.T) for a in state)
    return float(np.abs(np.linalg.eigvals(M)).max())


def exact_norm(sys: TreeSystem, tol: float = SDP_TOL) -> NormResult:
    """Norm of the untruncated operator as the optimum of the storage LMI.

    Minimizes ``t`` subject to ``H >= 0`` and

        [[H - C^*C - sum A_j^* H A_j,   -G^*              ],
         [-G,                            t I - D^*D - sum B_j^* H B_j]] >= 0

    with ``G = D^*C + sum B_j^* H A_j`` (plus ``H <= (t-1) I`` for systems with
    an initial state).  The state map must be stable; the caller checks that.
    """
    import cvxpy as cp

    A, Bm, C, D = sys.state, sys.inp, sys.out, sys.feed
    if not np.any(Bm) and not sys.initial:
        return NormResult(float(np.linalg.norm(D, 2)), 0.0, np.zeros((sys.s, sys.s)))
    s, m = sys.s, sys.m
    # a 1x1 hermitian variable trips a warning inside cvxpy; it is real anyway
    H = cp.Variable((s, s), hermitian=True) if s > 1 else cp.Variable((1, 1), symmetric=True)
    t = cp.Variable()
    G = D.conj().T @ C + sum(Bm[j].conj().T @ H @ A[j] for j in range(sys.n))
    top = H - C.conj().T @ C - sum(A[j].conj().T @ H @ A[j] for j in range(sys.n))
    bottom = t * np.eye(m) - D.conj().T @ D - sum(Bm[j].conj().T @ H @ Bm[j] for j in range(sys.n))
    lmi = cp.bmat([[top, -G.H], [-G, bottom]])
    cons = [(lmi + lmi.H) / 2 >> 0, H >> 0]
    if sys.initial:
        cons.append((t - 1) * np.eye(s) - H >> 0)
    prob = cp.Problem(cp.Minimize(t), cons)
    try:
        with warnings.catch_warnings():
            # an "inaccurate" flag is judged below from the certificate itself
            warnings.simplefilter("ignore", UserWarning)
            prob.solve(solver=cp.CLARABEL, tol_gap_abs=tol, tol_gap_rel=tol, tol_feas=tol)
    except cp.error.SolverError as exc:
        raise NumericalError(f"SDP solver failed: {exc}") from exc
    if prob.status in ("infeasible", "infeasible_inaccurate", "unbounded"):
        return NormResult(np.inf, -np.inf, None)
    if prob.status not in ("optimal", "optimal_inaccurate") or t.value is None:
        raise NumericalError(f"SDP returned status {prob.status}")
    tv = float(t.value)
    Hv = np.asarray(H.value)
    res = lmi_residual(sys, Hv, tv)
    if prob.status == "optimal_inaccurate":
        log.debug("SDP flagged inaccurate; certificate residual %.3g", res)
        if res < -CERT_TOL * max(1.0, tv):
            raise NumericalError(f"SDP certificate violated by {-res:.3g}")
    return NormResult(float(np.sqrt(max(tv, 0.0))), res, Hv)


def lmi_residual(sys: TreeSystem, H: np.ndarray, t: float) -> float:
    """Smallest eigenvalue over the certificate LMI blocks at ``(H, t)``."""
    A, Bm, C, D = sys.state, sys.inp, sys.out, sys.feed
    G = D.conj().T @ C + sum(Bm[j].conj().T @ H @ A[j] for j in range(sys.n))
    top = H - C.conj().T @ C - sum(A[j].conj().T @ H @ A[j] for j in range(sys.n))
    bottom = t * np.eye(sys.m) - D.conj().T @ D - sum(Bm[j].conj().T @ H @ Bm[j] for j in range(sys.n))
    M = hermitian_part(np.block([[top, -G.conj().T], [-G, bottom]]))
    vals = [np.linalg.eigvalsh(M).min(), np.linalg.eigvalsh(hermitian_part(H)).min()]
    if sys.initial:
        vals.append(np.linalg.eigvalsh((t - 1) * np.eye(sys.s) - hermitian_part(H)).min())
    return float(min(vals))
