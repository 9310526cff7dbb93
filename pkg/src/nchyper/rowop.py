"""Row tuples of matrices and the operators they induce on the Fock space.

A row tuple is stored as a complex array of shape ``(n, d, d)``.  Anything
convertible (a list of matrices, a list of scalars for ``d = 1``) is accepted
by :func:`as_tuple`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import ValidationError
from .fock import FockBasis, FockOperator, as_blocks, coeff_apply, pull, push
from .numlin import sqrt_psd

ROW_TOL = 1e-10


def as_tuple(X) -> np.ndarray:
    """Coerce ``X`` to a ``(n, d, d)`` complex array."""
    arr = np.asarray(X, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1, 1)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or arr.shape[0] < 1:
        raise ValidationError(f"expected n square matrices, got array of shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("tuple has non-finite entries")
    return arr


def check_pair(A, B):
    A, B = as_tuple(A), as_tuple(B)
    if A.shape != B.shape:
        raise ValidationError(f"tuples differ in shape: {A.shape} vs {B.shape}")
    return A, B


def row_matrix(X) -> np.ndarray:
    """The row operator ``[X_1 ... X_n]`` as a ``d x nd`` matrix."""
    X = as_tuple(X)
    return np.hstack(list(X))


def row_norm(X) -> float:
    return float(np.linalg.norm(row_matrix(X), 2))


def is_strict(X, tol: float = ROW_TOL) -> bool:
    return row_norm(X) < 1 - tol


def word_product(X, alpha) -> np.ndarray:
    X = as_tuple(X)
    d = X.shape[1]
    return reduce(lambda P, i: P @ X[i - 1], alpha, np.eye(d, dtype=complex))


@dataclass(frozen=True)
class DefectPair:
    delta: np.ndarray       # d x d, (I - sum X_i X_i^*)^{1/2}
    delta_star: np.ndarray  # nd x nd, ([delta_ij I - X_i^* X_j])^{1/2}


def defects(X, tol: float = ROW_TOL) -> DefectPair:
    X = as_tuple(X)
    n, d, _ = X.shape
    rho = row_norm(X)
    if rho > 1 + tol:
        raise ValidationError(f"row norm {rho:.12g} exceeds 1")
    row = row_matrix(X)
    delta = sqrt_psd(np.eye(d) - row @ row.conj().T, tol=max(tol, 1e-10))
    delta_star = sqrt_psd(np.eye(n * d) - row.conj().T @ row, tol=max(tol, 1e-10))
    return DefectPair(delta, delta_star)


def _reconstruction_apply(X, basis: FockBasis, adjoint: bool):
    n, d, _ = X.shape
    coeffs = [x.conj().T for x in X] if not adjoint else list(X)
    children = basis.right_child

    def apply(x3):
        out = np.zeros_like(x3)
        for i in range(n):
            moved = pull(x3, children[i]) if adjoint else push(x3, children[i])
            out += coeff_apply(coeffs[i], moved)
        return out

    return apply


def _check_arity(X, basis: FockBasis):
    if X.shape[0] != basis.n:
        raise ValidationError(f"tuple has arity {X.shape[0]} but basis has n={basis.n}")


def reconstruction_operator(X, basis: FockBasis) -> FockOperator:
    """``R_X = sum_i X_i^* (x) R_i`` on ``C^d (x) F^2``."""
    X = as_tuple(X)
    _check_arity(X, basis)
    d, N = X.shape[1], basis.dim
    fwd = _reconstruction_apply(X, basis, adjoint=False)
    bwd = _reconstruction_apply(X, basis, adjoint=True)
    size = d * N
    return FockOperator(
        (size, size),
        lambda V: fwd(as_blocks(V, d, N)).reshape(size, -1),
        lambda V: bwd(as_blocks(V, d, N)).reshape(size, -1),
    )


def resolvent_sum(step, x3: np.ndarray, K: int) -> np.ndarray:
    """``sum_{k=0}^{K} step^k x`` for a level-raising ``step`` (exact inverse of I - step)."""
    acc = x3.copy()
    cur = x3
    for _ in range(K):
        cur = step(cur)
        if not cur.any():
            break
        acc += cur
    return acc


@dataclass(frozen=True)
class FactorOperators:
    """``C_X`` and, when the defect is invertible, ``C_X^{-1}``."""
    c: FockOperator
    c_inv: FockOperator | None = field(default=None)


def c_operator(X, basis: FockBasis) -> FockOperator:
    """``C_X = (Delta_X (x) I)(I - R_X)^{-1}`` compressed to levels ``<= K``."""
    return factor_operators(X, basis).c


def c_inverse_operator(X, basis: FockBasis) -> FockOperator:
    """``C_X^{-1} = (I - R_X)(Delta_X^{-1} (x) I)``; needs a strict contraction."""
    ops = factor_operators(X, basis)
    if ops.c_inv is None:
        raise ValidationError("C_X is not invertible: the defect Delta_X is singular")
    return ops.c_inv


def factor_operators(X, basis: FockBasis) -> FactorOperators:
    X = as_tuple(X)
    _check_arity(X, basis)
    d, N, K = X.shape[1], basis.dim, basis.K
    size = d * N
    delta = defects(X).delta
    fwd = _reconstruction_apply(X, basis, adjoint=False)
    bwd = _reconstruction_apply(X, basis, adjoint=True)

    def c_apply(V):
        y = resolvent_sum(fwd, as_blocks(V, d, N), K)
        return coeff_apply(delta, y).reshape(size, -1)

    def c_adjoint(V):
        y = coeff_apply(delta, as_blocks(V, d, N))
        return resolvent_sum(bwd, y, K).reshape(size, -1)

    c = FockOperator((size, size), c_apply, c_adjoint)
    if np.linalg.svd(delta, compute_uv=False).min() <= 1e-12:
        return FactorOperators(c, None)
    delta_inv = np.linalg.inv(delta)

    def inv_apply(V):
        y = coeff_apply(delta_inv, as_blocks(V, d, N))
        return (y - fwd(y)).reshape(size, -1)

    def inv_adjoint(V):
        x3 = as_blocks(V, d, N)
        return coeff_apply(delta_inv, x3 - bwd(x3)).reshape(size, -1)

    return FactorOperators(c, FockOperator((size, size), inv_apply, inv_adjoint))


@dataclass(frozen=True)
class SpectralRadiusEstimate:
    value: float                 # extrapolated limit
    last_term: float             # ||Phi^k(I)||^{1/2k} at k = 2**k_max
    terms: tuple[float, ...]     # the whole squared-power sequence
    converged: bool

    def __float__(self):
        return self.value


def cp_matrix(X) -> np.ndarray:
    """Matrix of ``Y -> sum_i X_i Y X_i^*`` acting on row-major ``vec(Y)``."""
    X = as_tuple(X)
    return sum(np.kron(x, x.conj()) for x in X)


def joint_spectral_radius(X, k_max: int = 20, rtol: float = 1e-6) -> SpectralRadiusEstimate:
    """Joint spectral radius ``lim ||sum_{|a|=k} X_a X_a^*||^{1/2k}``.

    The completely positive map ``Phi`` is squared repeatedly, so term ``j``
    is ``||Phi^{2^j}(I)||^{1/2^{j+1}}``.  Every term bounds the limit from
    above.  The limit itself equals the square root of the spectral radius of
    ``Phi`` seen as a ``d^2 x d^2`` matrix, which serves as the extrapolated
    value (capped by the smallest term).
    """
    if k_max < 4:
        raise ValidationError("k_max must be at least 4")
    X = as_tuple(X)
    d = X.shape[1]
    M = cp_matrix(X)
    eye = np.eye(d, dtype=complex).reshape(-1)
    terms = []
    log_scale = 0.0  # Phi^k = exp(log_scale) * M
    k = 1
    for j in range(k_max + 1):
        y = M @ eye
        ny = np.linalg.norm(y.reshape(d, d), 2)
        if ny == 0.0:
            terms.append(0.0)
            break
        terms.append(float(np.exp((np.log(ny) + log_scale) / (2 * k))))
        if j == k_max:
            break
        M = M @ M
        log_scale *= 2
        s = np.abs(M).max()
        if s == 0.0:
            terms.append(0.0)
            break
        M = M / s
        log_scale += np.log(s)
        k *= 2
    rho = float(np.sqrt(np.abs(np.linalg.eigvals(cp_matrix(X))).max()))
    value = min(rho, min(terms))
    last = terms[-1]
    converged = abs(last - value) <= rtol * max(value, 1e-300) or last == 0.0
    return SpectralRadiusEstimate(value, last, tuple(terms), bool(converged))
