"""Multi-Toeplitz kernels, pluriharmonic Poisson kernels and Poisson maps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fock import FockBasis
from .rowop import as_tuple, c_inverse_operator, row_norm, word_product
from .numlin import hermitian_part, sqrt_psd


@dataclass(frozen=True)
class KernelBlock:
    """Finite section ``[K(beta, alpha)]`` over words of length ``<= q``.

    The matrix is word-major: row ``index(beta) * d + a``.
    """
    matrix: np.ndarray
    basis: FockBasis
    d: int
    r: float

    @property
    def q(self):
        return self.basis.K

    def block(self, beta, alpha) -> np.ndarray:
        i, j = self.basis.word_index(beta), self.basis.word_index(alpha)
        d = self.d
        return self.matrix[i * d:(i + 1) * d, j * d:(j + 1) * d]


def _word_products(X: np.ndarray, basis: FockBasis, adjoint: bool = False) -> np.ndarray:
    """``X_alpha`` (or ``X_alpha^*``) for every basis word, shape (dim, d, d)."""
    n, d, _ = X.shape
    out = np.empty((basis.dim, d, d), dtype=complex)
    out[0] = np.eye(d)
    for k in range(basis.K):
        lo, hi = basis.offsets[k], basis.offsets[k + 1]
        for i in range(n):
            dst = basis.right_child[i, lo:hi]
            if adjoint:   # (X_beta X_i)^* = X_i^* X_beta^*
                out[dst] = X[i].conj().T @ out[lo:hi]
            else:
                out[dst] = out[lo:hi] @ X[i]
    return out


def multi_toeplitz_block(X, q: int, r: float = 1.0, tol: float = 1e-8) -> KernelBlock:
    """Level-``q`` section of the multi-Toeplitz kernel of ``X`` scaled by ``r``.

    Block ``(beta, alpha)`` is ``r^{|s|} X_s`` when ``alpha = beta s``, its adjoint
    when ``beta = alpha s``, the identity on the diagonal and zero for
    incomparable words.  Tuples outside the closed ball are accepted (their
    kernels fail to be positive, which callers may use as a witness).
    """
    if not 0 < r <= 1:
        raise ValidationError("r must lie in (0, 1]")
    if q < 0:
        raise ValidationError("q must be nonnegative")
    X = as_tuple(X)
    n, d, _ = X.shape
    basis = FockBasis(n, q)
    N = basis.dim
    prods = _word_products(X, basis)
    M = np.zeros((N * d, N * d), dtype=complex)
    a_off = np.arange(d)
    for s_idx, sigma in enumerate(basis.words):
        target = basis.append_map(sigma)
        rows = np.nonzero(target >= 0)[0]
        cols = target[rows]
        block = (r ** len(sigma)) * prods[s_idx]
        ri = (rows[:, None] * d + a_off[None, :])        # (k, d)
        ci = (cols[:, None] * d + a_off[None, :])
        M[ri[:, :, None], ci[:, None, :]] = block
        if sigma:
            M[ci[:, :, None], ri[:, None, :]] = block.conj().T
    return KernelBlock(M, basis, d, float(r))


def pluriharmonic_poisson(X, basis: FockBasis, r: float = 1.0) -> np.ndarray:
    """Compression of ``P(X, rR)`` to levels ``<= K`` on ``C^d (x) F^2`` (dense).

    Entry ``(gamma, beta)`` of the Fock grading is the kernel block
    ``K(gamma, beta)``, so this is the level-``K`` kernel section reordered
    coefficient-major.
    """
    X = as_tuple(X)
    if X.shape[0] != basis.n:
        raise ValidationError("arity mismatch")
    d, N = X.shape[1], basis.dim
    kb = multi_toeplitz_block(X, basis.K, r)
    perm = (np.arange(d)[:, None] + d * np.arange(N)[None, :]).ravel()
    return kb.matrix[np.ix_(perm, perm)]


@dataclass(frozen=True)
class PoissonKernelMap:
    matrix: np.ndarray   # (d*dim) x d, coefficient-major rows
    r: float
    basis: FockBasis
    tail_bound: float    # bound on ||K^* K - I|| from the dropped levels


def poisson_kernel_map(T, r: float, basis: FockBasis) -> PoissonKernelMap:
    """``h -> sum_alpha r^{|alpha|} Delta_{T,r} T_alpha^* h (x) e_alpha`` truncated.

    The full ``C^d`` coefficient factor is kept even when ``Delta_{T,r}`` is
    singular.  ``K^*K = I - Phi_r^{K+1}(I)`` exactly, where ``Phi_r`` is the
    completely positive map of ``rT``; hence the tail bound ``(r rho)^{2(K+1)}``.
    """
    T = as_tuple(T)
    n, d, _ = T.shape
    if T.shape[0] != basis.n:
        raise ValidationError("arity mismatch")
    if not 0 < r <= 1:
        raise ValidationError("r must lie in (0, 1]")
    rho = row_norm(T)
    if r * rho > 1 + 1e-10:
        raise ValidationError("rT is not a row contraction")
    row = np.hstack(list(T))
    delta_r = sqrt_psd(np.eye(d) - r * r * row @ row.conj().T)
    adj = _word_products(T, basis, adjoint=True)          # T_alpha^*
    weights = r ** basis.levels.astype(float)
    cols = np.einsum("ab,wbc->awc", delta_r, adj * weights[:, None, None])
    mat = cols.reshape(d * basis.dim, d)
    tail = float((r * rho) ** (2 * (basis.K + 1)))
    return PoissonKernelMap(mat, float(r), basis, tail)


def poisson_transform_monomial(T, alpha, beta) -> np.ndarray:
    """Poisson transform of ``S_alpha S_beta^*``, that is ``T_alpha T_beta^*``."""
    return word_product(T, alpha) @ word_product(T, beta).conj().T


def circle_kernel(T, z: complex, k_max: int = 200) -> np.ndarray:
    """Operator Poisson kernel ``sum z^k T^{*k} + I + sum conj(z)^k T^k``.

    For ``|z| > 0.5`` the closed form ``(I - conj(z) T)^{-1} + h.c. - I`` is used,
    otherwise the series truncated at ``k_max`` (tail below ``|z|^{k_max+1}``).
    """
    T = np.atleast_2d(np.asarray(T, dtype=complex))
    if abs(z) >= 1:
        raise ValidationError("|z| must be < 1")
    if np.linalg.norm(T, 2) > 1 + 1e-10:
        raise ValidationError("T must be a contraction")
    d = T.shape[0]
    eye = np.eye(d, dtype=complex)
    if abs(z) > 0.5:
        res = np.linalg.solve(eye - np.conj(z) * T, eye)
        return hermitian_part(res + res.conj().T - eye)
    acc = np.zeros_like(eye)
    power = eye.copy()
    for _ in range(k_max + 1):
        acc += power
        power = np.conj(z) * (power @ T)
    return hermitian_part(acc + acc.conj().T - eye)


def poisson_factorization_residual(X, basis: FockBasis) -> float:
    """Relative defect of ``P(X, R) = C_X^* C_X`` checked at a fixed truncation.

    Compressing both sides to level ``K`` does not commute with the product
    (``C_X`` raises levels without bound), but ``C_X^{-1}`` raises them by at
    most one.  So ``J^* P J = I`` holds exactly for ``J`` the columns of
    ``C_X^{-1}`` on levels ``<= K`` and ``P`` compressed to level ``K + 1``.
    """
    X = as_tuple(X)
    d = X.shape[1]
    big = FockBasis(basis.n, basis.K + 1)
    P = pluriharmonic_poisson(X, big)
    J = c_inverse_operator(X, big).dense()
    cols = (np.arange(d)[:, None] * big.dim + np.arange(basis.dim)[None, :]).ravel()
    Jc = J[:, cols]
    lhs = Jc.conj().T @ P @ Jc
    return float(np.abs(lhs - np.eye(lhs.shape[0])).max() / np.abs(P).max())
