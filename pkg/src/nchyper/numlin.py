"""Dense and matrix-free linear algebra helpers."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, LinearOperator, aslinearoperator, svds

from .errors import NumericalError, ValidationError

log = logging.getLogger(__name__)

DENSE_LIMIT = 4096
# matrix-free operators are only materialized when this small, since doing so
# costs one application per column
MATERIALIZE_LIMIT = 1024
POWER_SEED = 20240531
POWER_TOL = 1e-10
POWER_MAXITER = 10000


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return (M + M.conj().T) / 2


def is_hermitian(M: np.ndarray, tol: float = 1e-10) -> bool:
    scale = max(1.0, np.abs(M).max(initial=0.0))
    return np.abs(M - M.conj().T).max(initial=0.0) <= tol * scale


def _start_vector(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def power_norm(M, tol: float = POWER_TOL, maxiter: int = POWER_MAXITER,
               seed: int = POWER_SEED) -> float:
    """Largest singular value by power iteration on ``M^* M``."""
    op = aslinearoperator(M)
    v = _start_vector(op.shape[1], seed)
    est = 0.0
    for it in range(maxiter):
        w = op.rmatvec(op.matvec(v))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new = np.sqrt(nw)
        v = w / nw
        if abs(new - est) <= tol * new:
            log.debug("power iteration converged after %d steps", it + 1)
            return float(new)
        est = new
    raise NumericalError(f"power iteration did not reach rel tol {tol} in {maxiter} steps",
                         last_iterate=(est, v))


def operator_norm(M, tol: float = POWER_TOL, method: str = "auto",
                  seed: int = POWER_SEED) -> float:
    """Spectral norm of a dense/sparse matrix or a LinearOperator.

    Explicit matrices up to ``DENSE_LIMIT`` go through a full SVD.  Larger ones
    and matrix-free operators use ARPACK Lanczos on ``M^* M`` (``method="lanczos"``)
    or plain power iteration (``method="power"``), both from a seeded start.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    shape = M.shape
    if min(shape) == 0:
        return 0.0
    if method == "auto":
        if isinstance(M, np.ndarray):
            method = "dense" if max(shape) <= DENSE_LIMIT else "lanczos"
        elif sp.issparse(M):
            method = "dense" if max(shape) <= DENSE_LIMIT else "lanczos"
        else:
            method = "dense" if max(shape) <= MATERIALIZE_LIMIT else "lanczos"
    if method == "dense":
        if isinstance(M, LinearOperator):
            A = M.dense() if hasattr(M, "dense") else M @ np.eye(shape[1])
        elif sp.issparse(M):
            A = M.toarray()
        else:
            A = np.asarray(M)
        if not np.all(np.isfinite(A)):
            raise NumericalError("non-finite entries in matrix")
        return float(sla.svdvals(A, check_finite=False)[0])
    if method == "power":
        return power_norm(M, tol=tol, seed=seed)
    if method != "lanczos":
        raise ValidationError(f"unknown method {method!r}")
    if min(shape) < 3:
        return operator_norm(aslinearoperator(M) @ np.eye(shape[1]), method="dense")
    op = aslinearoperator(M)
    v0 = _start_vector(min(shape), seed)
    try:
        s = svds(op, k=1, which="LM", v0=v0, tol=tol, maxiter=POWER_MAXITER,
                 return_singular_vectors=False, solver="arpack")
    except ArpackNoConvergence as exc:
        raise NumericalError("Lanczos did not converge", last_iterate=exc.eigenvalues) from exc
    except ArpackError as exc:
        # typically a heavily degenerate top singular value; power iteration copes with that
        log.debug("ARPACK failed (%s); falling back to power iteration", exc)
        return power_norm(M, tol=tol, seed=seed)
    return float(np.max(s))


@dataclass(frozen=True)
class PencilResult:
    c_min: float
    certificate: np.ndarray | None = None

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.c_min))


def min_pencil_constant(P: np.ndarray, Q: np.ndarray, tol: float = 1e-10) -> PencilResult:
    """Smallest ``c >= 0`` with ``c^2 Q - P`` positive semidefinite.

    ``Q`` is whitened on its numerical range (eigenvalues above
    ``1e-10 * ||Q||``).  A positive part of ``P`` on the null space of ``Q``, or
    coupling between the range and a null direction where ``P`` vanishes,
    makes the answer infinite.
    """
    P = np.asarray(P, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    if P.shape != Q.shape or P.shape[0] != P.shape[1]:
        raise ValidationError(f"pencil needs equal square shapes, got {P.shape}, {Q.shape}")
    if not (is_hermitian(P) and is_hermitian(Q)):
        raise ValidationError("pencil inputs must be Hermitian")
    P, Q = hermitian_part(P), hermitian_part(Q)
    wq, U = np.linalg.eigh(Q)
    qscale = max(np.abs(wq).max(initial=0.0), 1e-300)
    if wq.min(initial=0.0) < -max(tol, 1e-10 * qscale):
        raise ValidationError(f"Q is not positive semidefinite (min eigenvalue {wq.min():.3e})")
    rng_mask = wq > 1e-10 * qscale
    Ur, Un = U[:, rng_mask], U[:, ~rng_mask]
    Prr = Ur.conj().T @ P @ Ur
    pscale = max(1.0, np.abs(P).max(initial=0.0))
    if Un.shape[1]:
        Pnn = hermitian_part(Un.conj().T @ P @ Un)
        Prn = Ur.conj().T @ P @ Un
        wn, Vn = np.linalg.eigh(-Pnn)
        if wn.min() < -tol * pscale:
            return PencilResult(np.inf, Un @ Vn[:, 0])
        strong = wn > tol * pscale
        weak = Prn @ Vn[:, ~strong]
        if weak.size and np.abs(weak).max() > np.sqrt(tol) * pscale:
            return PencilResult(np.inf, Un @ Vn[:, np.argmin(wn)])
        Vs = Vn[:, strong]
        if Vs.shape[1]:
            coupling = Prn @ Vs
            Prr = Prr + coupling @ np.diag(1.0 / wn[strong]) @ coupling.conj().T
    if Ur.shape[1] == 0:
        return PencilResult(0.0, None)
    scale = 1.0 / np.sqrt(wq[rng_mask])
    W = hermitian_part(scale[:, None] * Prr * scale[None, :])
    w, V = np.linalg.eigh(W)
    top = w[-1]
    c = float(np.sqrt(max(top, 0.0)))
    cert = Ur @ (scale * V[:, -1])
    return PencilResult(c, cert / np.linalg.norm(cert))


def sqrt_psd(M: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Hermitian PSD square root; tiny negative eigenvalues are clamped."""
    M = np.asarray(M, dtype=complex)
    if not is_hermitian(M, tol=max(tol, 1e-10)):
        raise ValidationError("sqrt_psd needs a Hermitian matrix")
    w, U = np.linalg.eigh(hermitian_part(M))
    scale = max(1.0, np.abs(w).max(initial=0.0))
    if w.min(initial=0.0) < -tol * scale:
        raise ValidationError(f"matrix is not PSD (min eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    R = (U * np.sqrt(w)) @ U.conj().T
    return hermitian_part(R)


def least_squares_solve(A: np.ndarray, B: np.ndarray, cutoff: float = 1e-12):
    """Minimum-norm least-squares solution of ``A X = B``.

    Singular values below ``cutoff * s_max`` are treated as zero.  Returns the
    solution and the spectral norm of the residual ``A X - B``.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape[0] != B.shape[0]:
        raise ValidationError(f"shape mismatch {A.shape} vs {B.shape}")
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    keep = s > cutoff * (s[0] if s.size else 0.0)
    if s.size == 0 or not keep.any():
        X = np.zeros((A.shape[1], B.shape[1]), dtype=complex)
    else:
        X = Vh[keep].conj().T @ ((U[:, keep].conj().T @ B) / s[keep][:, None])
    R = A @ X - B
    res = float(np.linalg.norm(R, 2)) if R.size else 0.0
    return X, res
