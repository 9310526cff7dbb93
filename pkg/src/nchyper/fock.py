"""Words in the free semigroup and the truncated full Fock space.

A word is a tuple of generator indices in ``1..n``; the empty tuple is the
neutral element.  Basis vectors ``e_w`` of the Fock space are indexed
degree-first and then lexicographically, so index 0 is the empty word and
level ``k`` occupies a contiguous slice.

Vectors on ``C^c (x) F^2`` are stored coefficient-major: entry ``(a, w)`` sits
at ``a * dim + index(w)``.  All operators here are compressions to the levels
``<= K``: anything pushed past level ``K`` is dropped.
"""

from __future__ import annotations

import threading
from collections.abc import Callable, Sequence

import numpy as np
from scipy.sparse.linalg import LinearOperator

from .errors import CapacityError, ValidationError

Word = tuple[int, ...]

DEFAULT_CAP = 2**20


def fock_dimension(n: int, K: int) -> int:
    """Number of words of length at most ``K`` over ``n`` letters."""
    if n == 1:
        return K + 1
    return (n ** (K + 1) - 1) // (n - 1)


def enumerate_words(n: int, K: int, cap: int = DEFAULT_CAP) -> list[Word]:
    """All words of length ``<= K`` in canonical (degree, then lex) order."""
    if n < 1 or K < 0:
        raise ValidationError(f"need n >= 1 and K >= 0, got n={n}, K={K}")
    dim = fock_dimension(n, K)
    if dim > cap:
        raise CapacityError(f"Fock dimension {dim} exceeds cap {cap} (n={n}, K={K})")
    words: list[Word] = [()]
    level: list[Word] = [()]
    for _ in range(K):
        level = [w + (i,) for w in level for i in range(1, n + 1)]
        words.extend(level)
    return words


def left_divide(omega: Sequence[int], gamma: Sequence[int]) -> Word | None:
    """Return ``sigma`` with ``omega = gamma sigma`` if ``gamma`` is a proper prefix."""
    omega, gamma = tuple(omega), tuple(gamma)
    if len(gamma) >= len(omega) or omega[: len(gamma)] != gamma:
        return None
    return omega[len(gamma):]


def reverse_word(alpha: Sequence[int]) -> Word:
    return tuple(reversed(tuple(alpha)))


def word_to_str(alpha: Sequence[int]) -> str:
    return "g0" if len(alpha) == 0 else "".join(f"g{i}" for i in alpha)


class FockBasis:
    """Index bookkeeping for the Fock space truncated at level ``K``.

    Besides the word/index bijection this precomputes, for every generator,
    the index of ``w g_i`` (right child) and ``g_i w`` (left child), with -1
    marking words on the top level.
    """

    def __init__(self, n: int, K: int, cap: int = DEFAULT_CAP):
        self.n = int(n)
        self.K = int(K)
        self.words = enumerate_words(self.n, self.K, cap)
        self.dim = len(self.words)
        self.index = {w: i for i, w in enumerate(self.words)}
        self.offsets = np.array([fock_dimension(self.n, k - 1) if k > 0 else 0
                                 for k in range(self.K + 2)])
        self.levels = np.repeat(np.arange(self.K + 1), np.diff(self.offsets))

        self.right_child = np.full((self.n, self.dim), -1, dtype=np.int64)
        self.left_child = np.full((self.n, self.dim), -1, dtype=np.int64)
        for k in range(self.K):
            lo, hi = self.offsets[k], self.offsets[k + 1]
            rank = np.arange(hi - lo)
            nxt = self.offsets[k + 1]
            for i in range(self.n):
                self.right_child[i, lo:hi] = nxt + rank * self.n + i
                self.left_child[i, lo:hi] = nxt + i * self.n**k + rank
        for arr in (self.right_child, self.left_child, self.levels, self.offsets):
            arr.setflags(write=False)

    def __repr__(self):
        return f"FockBasis(n={self.n}, K={self.K}, dim={self.dim})"

    def word_index(self, alpha: Sequence[int]) -> int:
        return self.index[tuple(alpha)]

    def level_mask(self, max_level: int) -> np.ndarray:
        """Boolean mask of basis words with length ``<= max_level``."""
        return self.levels <= max_level

    def append_map(self, alpha: Sequence[int]) -> np.ndarray:
        """Index of ``beta alpha`` for every ``beta`` (or -1 past level K)."""
        idx = np.arange(self.dim)
        for letter in alpha:
            ok = idx >= 0
            idx = np.where(ok, self.right_child[letter - 1][np.where(ok, idx, 0)], -1)
        return idx

    def prepend_map(self, alpha: Sequence[int]) -> np.ndarray:
        """Index of ``alpha beta`` for every ``beta`` (or -1 past level K)."""
        idx = np.arange(self.dim)
        for letter in reversed(tuple(alpha)):
            ok = idx >= 0
            idx = np.where(ok, self.left_child[letter - 1][np.where(ok, idx, 0)], -1)
        return idx


def push(x: np.ndarray, child: np.ndarray) -> np.ndarray:
    """Move Fock components along an index map; ``x`` has shape (c, dim, k)."""
    out = np.zeros_like(x)
    src = np.nonzero(child >= 0)[0]
    out[:, child[src], :] = x[:, src, :]
    return out


def pull(x: np.ndarray, child: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`push`."""
    out = np.zeros_like(x)
    src = np.nonzero(child >= 0)[0]
    out[:, src, :] = x[:, child[src], :]
    return out


def as_blocks(x: np.ndarray, coeff_dim: int, dim: int) -> np.ndarray:
    return x.reshape(coeff_dim, dim, -1)


def coeff_apply(M: np.ndarray, x3: np.ndarray) -> np.ndarray:
    """Apply ``M (x) I`` to a block array of shape (c, dim, k)."""
    return np.tensordot(M, x3, axes=(1, 0))


class FockOperator(LinearOperator):
    """Linear operator on ``C^c (x) F^2`` given by apply / adjoint-apply callables.

    Both callables take and return 2-D arrays (one column per vector).  A dense
    copy can be requested with :meth:`dense`; it is built once under a lock.
    """

    def __init__(self, shape, apply: Callable, apply_adjoint: Callable, dtype=complex):
        super().__init__(dtype=np.dtype(dtype), shape=tuple(int(s) for s in shape))
        self._apply = apply
        self._apply_adjoint = apply_adjoint
        self._dense = None
        self._lock = threading.Lock()

    @classmethod
    def from_matrix(cls, M) -> FockOperator:
        MH = M.conj().T
        return cls(M.shape, lambda X: M @ X, lambda X: MH @ X)

    def _matvec(self, x):
        return np.asarray(self._apply(np.asarray(x).reshape(-1, 1))).ravel()

    def _rmatvec(self, x):
        return np.asarray(self._apply_adjoint(np.asarray(x).reshape(-1, 1))).ravel()

    def _matmat(self, X):
        return np.asarray(self._apply(np.asarray(X)))

    def _rmatmat(self, X):
        return np.asarray(self._apply_adjoint(np.asarray(X)))

    def _adjoint(self):
        return FockOperator(self.shape[::-1], self._apply_adjoint, self._apply, self.dtype)

    def apply(self, X):
        return self._matmat(X)

    def apply_adjoint(self, X):
        return self._rmatmat(X)

    def dense(self) -> np.ndarray:
        with self._lock:
            if self._dense is None:
                M = self._matmat(np.eye(self.shape[1], dtype=self.dtype))
                M.setflags(write=False)
                self._dense = M
        return self._dense

    def then(self, other: FockOperator) -> FockOperator:
        """Composition ``other @ self`` kept as a FockOperator."""
        if other.shape[1] != self.shape[0]:
            raise ValidationError(f"cannot compose {self.shape} with {other.shape}")
        return FockOperator(
            (other.shape[0], self.shape[1]),
            lambda X: other.apply(self.apply(X)),
            lambda X: self.apply_adjoint(other.apply_adjoint(X)),
        )

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return other.then(self)
        return super().__matmul__(other)


def _creation(child: np.ndarray, dim: int, coeff_dim: int) -> FockOperator:
    size = coeff_dim * dim

    def apply(X):
        return push(as_blocks(X, coeff_dim, dim), child).reshape(size, -1)

    def apply_adjoint(X):
        return pull(as_blocks(X, coeff_dim, dim), child).reshape(size, -1)

    return FockOperator((size, size), apply, apply_adjoint)


def _check_letter(i: int, basis: FockBasis):
    if not 1 <= i <= basis.n:
        raise ValidationError(f"generator index {i} outside 1..{basis.n}")


def left_creation(i: int, basis: FockBasis, coeff_dim: int = 1) -> FockOperator:
    """``I_c (x) S_i`` with ``S_i e_w = e_{g_i w}`` (top level sent to 0)."""
    _check_letter(i, basis)
    return _creation(basis.left_child[i - 1], basis.dim, coeff_dim)


def right_creation(i: int, basis: FockBasis, coeff_dim: int = 1) -> FockOperator:
    """``I_c (x) R_i`` with ``R_i e_w = e_{w g_i}`` (top level sent to 0)."""
    _check_letter(i, basis)
    return _creation(basis.right_child[i - 1], basis.dim, coeff_dim)
