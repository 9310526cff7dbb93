"""Minimal isometric dilations, the intertwiner between them, characteristic functions.

The dilation space of a row contraction ``T`` on ``C^d`` is
``C^d (+) (C^{nd} (x) F^2)``; vectors are laid out as ``[h, xi]`` with ``xi``
coefficient-major.  The defect factor is kept at its full size ``nd``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import NotDominatedError, ValidationError
from .fock import FockBasis, FockOperator, as_blocks, coeff_apply, pull, push
from .numlin import least_squares_solve, operator_norm
from .realization import NormResult, TreeSystem, exact_norm, truncated_norm
from .rowop import as_tuple, check_pair, defects, resolvent_sum, row_matrix

SOLVE_TOL = 1e-8


def _creation_matrix(child: np.ndarray, dim: int) -> sp.csr_matrix:
    src = np.nonzero(child >= 0)[0]
    return sp.csr_matrix((np.ones(src.size), (child[src], src)), shape=(dim, dim))


@dataclass(frozen=True)
class IsometricDilation:
    T: np.ndarray
    basis: FockBasis
    blocks: tuple  # sparse V_1..V_n

    @property
    def d(self):
        return self.T.shape[1]

    @property
    def dim(self):
        return self.blocks[0].shape[0]

    def embed(self, h: np.ndarray) -> np.ndarray:
        """``h (+) 0`` in the dilation space."""
        v = np.zeros(self.dim, dtype=complex)
        v[: self.d] = h
        return v

    def word_apply(self, alpha, v: np.ndarray) -> np.ndarray:
        """``V_alpha v`` for a word ``alpha`` (rightmost letter acts first)."""
        for letter in reversed(tuple(alpha)):
            v = self.blocks[letter - 1] @ v
        return v

    def level_mask(self, max_level: int) -> np.ndarray:
        """Coordinates of the ``C^d`` part and of Fock levels ``<= max_level``."""
        nd = self.T.shape[0] * self.d
        fock = np.tile(self.basis.levels <= max_level, nd)
        return np.concatenate([np.ones(self.d, bool), fock])


def minimal_isometric_dilation(T, basis: FockBasis) -> IsometricDilation:
    """``V_i = [[T_i, 0], [D_i, I (x) S_i]]`` with ``D_i h = Delta_{T*}(0,..,h,..,0) (x) e_0``."""
    T = as_tuple(T)
    n, d, _ = T.shape
    if n != basis.n:
        raise ValidationError("arity mismatch")
    ds = defects(T).delta_star
    N = basis.dim
    nd = n * d
    blocks = []
    eye_nd = sp.identity(nd, format="csr")
    for i in range(n):
        S = _creation_matrix(basis.left_child[i], N)
        Di = np.zeros((nd * N, d), dtype=complex)
        Di[np.arange(nd) * N, :] = ds[:, i * d:(i + 1) * d]
        V = sp.bmat([[sp.csr_matrix(T[i]), None],
                     [sp.csr_matrix(Di), sp.kron(eye_nd, S, format="csr")]], format="csr")
        blocks.append(V)
    return IsometricDilation(T, basis, tuple(blocks))


def _resolvent_ops(A: np.ndarray, basis: FockBasis):
    """Forward and adjoint steps of ``R_A = sum A_j^* (x) R_j`` on block arrays."""
    n = A.shape[0]
    rc = basis.right_child

    def fwd(x3):
        return sum(coeff_apply(A[j].conj().T, push(x3, rc[j])) for j in range(n))

    def bwd(x3):
        return sum(coeff_apply(A[j], pull(x3, rc[j])) for j in range(n))

    return fwd, bwd


@dataclass(frozen=True)
class Intertwiner:
    """``L_{B,A}`` through its adjoint ``[[I, 0], [Omega, Theta]]`` (maps K_A to K_B)."""
    A: np.ndarray
    B: np.ndarray
    basis: FockBasis
    omega0: np.ndarray
    theta0: np.ndarray
    adjoint: FockOperator
    theta: FockOperator
    residuals: dict = field(default_factory=dict)

    @property
    def operator(self) -> FockOperator:
        return self.adjoint.H

    def omega_matrix(self) -> np.ndarray:
        d = self.A.shape[1]
        cols = self.adjoint.apply(np.vstack([np.eye(d), np.zeros((self.adjoint.shape[1] - d, d))]))
        return cols[d:]

    def omega_growth(self, levels: int | None = None) -> list[float]:
        """``||Omega||`` restricted to word lengths ``<= k`` for ``k = 0..levels``.

        Growth that does not level off suggests ``Omega`` is unbounded.
        """
        levels = self.basis.K if levels is None else levels
        M = self.omega0.conj().T @ self.omega0
        G = M.copy()
        out = [float(np.sqrt(np.linalg.norm(G, 2)))]
        for _ in range(levels):
            G = M + sum(a @ G @ a.conj().T for a in self.A)
            out.append(float(np.sqrt(np.linalg.norm(G, 2))))
        return out

    def system(self) -> TreeSystem:
        n, d, _ = self.A.shape
        ds_a = defects(self.A).delta_star
        inp = np.array([ds_a[j * d:(j + 1) * d, :] for j in range(n)])
        state = np.array([a.conj().T for a in self.A])
        return TreeSystem(state, inp, self.omega0, self.theta0, initial=True)

    def norm(self) -> NormResult:
        """Norm of the untruncated intertwiner."""
        return exact_norm(self.system())

    def truncated_norm(self, route: str = "horizon") -> float:
        if route == "horizon":
            return truncated_norm(self.system(), self.basis.K)
        return operator_norm(self.adjoint)


def intertwiner(A, B, basis: FockBasis, tol: float = SOLVE_TOL) -> Intertwiner:
    """Assemble ``L_{B,A}`` from the solutions of its two defect equations.

    ``Omega_0`` solves ``Delta_{B*} Omega_0 = col(A_i^* - B_i^*)`` and ``Theta_0``
    solves ``Delta_{B*} Theta_0 = Delta_{A*}`` (minimum-norm least squares).
    If either residual exceeds ``tol * (1 + ||rhs||)`` the pair is reported as
    not dominated at this tolerance.
    """
    A, B = check_pair(A, B)
    n, d, _ = A.shape
    if n != basis.n:
        raise ValidationError("arity mismatch")
    ds_a, ds_b = defects(A).delta_star, defects(B).delta_star
    rhs = (row_matrix(A) - row_matrix(B)).conj().T
    omega0, res_o = least_squares_solve(ds_b, rhs)
    theta0, res_t = least_squares_solve(ds_b, ds_a)
    residuals = {"omega0": res_o, "theta0": res_t}
    if res_o > tol * (1 + np.linalg.norm(rhs, 2)) or res_t > tol * (1 + np.linalg.norm(ds_a, 2)):
        raise NotDominatedError("defect equations have no solution at this tolerance", residuals)
    return assemble_intertwiner(A, B, basis, omega0, theta0, residuals)


def assemble_intertwiner(A, B, basis: FockBasis, omega0: np.ndarray, theta0: np.ndarray,
                         residuals: dict | None = None) -> Intertwiner:
    """Build the matrix-free adjoint ``[[I, 0], [Omega, Theta]]`` from ``Omega_0`` and ``Theta_0``.

    No check is made that the two coefficients solve the defect equations.
    """
    A, B = check_pair(A, B)
    n, d, _ = A.shape
    omega0 = np.asarray(omega0, dtype=complex)
    theta0 = np.asarray(theta0, dtype=complex)
    if n != basis.n:
        raise ValidationError("arity mismatch")
    if omega0.shape != (n * d, d) or theta0.shape != (n * d, n * d):
        raise ValidationError("coefficient shapes do not match the tuples")
    ds_a = defects(A).delta_star
    N, K, nd = basis.dim, basis.K, n * d
    size = d + nd * N
    fwd, bwd = _resolvent_ops(A, basis)
    rc = basis.right_child
    inp = [ds_a[j * d:(j + 1) * d, :] for j in range(n)]       # E_j Delta_{A*}
    inp_adj = [ds_a[:, j * d:(j + 1) * d] for j in range(n)]   # Delta_{A*} E_j^*

    def drive(xi):
        return sum(coeff_apply(inp[j], push(xi, rc[j])) for j in range(n))

    def theta_apply(X):
        xi = as_blocks(X, nd, N)
        state = resolvent_sum(fwd, drive(xi), K)
        return (coeff_apply(theta0, xi) + coeff_apply(omega0, state)).reshape(nd * N, -1)

    def theta_adjoint(X):
        eta = as_blocks(X, nd, N)
        z = resolvent_sum(bwd, coeff_apply(omega0.conj().T, eta), K)
        back = sum(coeff_apply(inp_adj[j], pull(z, rc[j])) for j in range(n))
        return (coeff_apply(theta0.conj().T, eta) + back).reshape(nd * N, -1)

    def apply(X):
        h, xi = X[:d], as_blocks(X[d:], nd, N)
        src = drive(xi)
        src[:, 0, :] += h
        state = resolvent_sum(fwd, src, K)
        out = coeff_apply(theta0, xi) + coeff_apply(omega0, state)
        return np.vstack([h, out.reshape(nd * N, -1)])

    def apply_adjoint(X):
        h, eta = X[:d], as_blocks(X[d:], nd, N)
        z = resolvent_sum(bwd, coeff_apply(omega0.conj().T, eta), K)
        back = sum(coeff_apply(inp_adj[j], pull(z, rc[j])) for j in range(n))
        xi = coeff_apply(theta0.conj().T, eta) + back
        return np.vstack([h + z[:, 0, :], xi.reshape(nd * N, -1)])

    adjoint = FockOperator((size, size), apply, apply_adjoint)
    theta = FockOperator((nd * N, nd * N), theta_apply, theta_adjoint)
    return Intertwiner(A, B, basis, omega0, theta0, adjoint, theta, dict(residuals or {}))


def intertwining_residual_operator(L: Intertwiner, VA: IsometricDilation,
                                   WB: IsometricDilation, i: int, q: int) -> FockOperator:
    """``(L W_i - V_i L)`` restricted to the part of K_B on levels ``<= q``."""
    mask = WB.level_mask(q).astype(float)
    Lop = L.operator
    V, W = VA.blocks[i], WB.blocks[i]
    VH, WH = V.conj().T.tocsr(), W.conj().T.tocsr()

    def apply(X):
        Xm = X * mask[:, None]
        return Lop.apply(W @ Xm) - V @ Lop.apply(Xm)

    def apply_adjoint(Y):
        out = WH @ Lop.apply_adjoint(Y) - Lop.apply_adjoint(VH @ Y)
        return out * mask[:, None]

    return FockOperator((VA.dim, WB.dim), apply, apply_adjoint)


def verify_intertwining(L: Intertwiner, VA: IsometricDilation, WB: IsometricDilation,
                        q: int, seed: int = 7) -> float:
    """Largest norm over ``i`` of ``(L W_i - V_i L) P_{<= q}``."""
    K = L.basis.K
    if q > K - 1:
        raise ValidationError("q must be at most K - 1")
    worst = 0.0
    for i in range(L.A.shape[0]):
        op = intertwining_residual_operator(L, VA, WB, i, q)
        cols = np.nonzero(WB.level_mask(q))[0]
        if cols.size <= 2048:
            E = np.zeros((WB.dim, cols.size), dtype=complex)
            E[cols, np.arange(cols.size)] = 1
            val = float(np.linalg.norm(op.apply(E), 2))
        else:
            val = _probe_norm(op, seed=seed)
        worst = max(worst, val)
    return worst


def _probe_norm(op: FockOperator, steps: int = 15, seed: int = 7) -> float:
    """Power-iteration estimate that tolerates operators at rounding level."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((op.shape[1], 1)) + 1j * rng.standard_normal((op.shape[1], 1))
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(steps):
        w = op.apply(v)
        est = max(est, float(np.linalg.norm(w)))
        v = op.apply_adjoint(w)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            break
        v /= nv
    return est


def characteristic_function(T, basis: FockBasis) -> FockOperator:
    """``Theta_T = -T (x) I + (Delta_T (x) I)(I - R_T)^{-1} sum_j (E_j Delta_{T*}) (x) R_j``.

    Acts from ``C^{nd} (x) F^2`` to ``C^d (x) F^2``.
    """
    T = as_tuple(T)
    n, d, _ = T.shape
    if n != basis.n:
        raise ValidationError("arity mismatch")
    df = defects(T)
    delta, ds = df.delta, df.delta_star
    row = row_matrix(T)
    N, K, nd = basis.dim, basis.K, n * d
    fwd, bwd = _resolvent_ops(T, basis)
    rc = basis.right_child
    inp = [ds[j * d:(j + 1) * d, :] for j in range(n)]
    inp_adj = [ds[:, j * d:(j + 1) * d] for j in range(n)]

    def apply(X):
        xi = as_blocks(X, nd, N)
        src = sum(coeff_apply(inp[j], push(xi, rc[j])) for j in range(n))
        out = -coeff_apply(row, xi) + coeff_apply(delta, resolvent_sum(fwd, src, K))
        return out.reshape(d * N, -1)

    def apply_adjoint(Y):
        eta = as_blocks(Y, d, N)
        z = resolvent_sum(bwd, coeff_apply(delta, eta), K)
        back = sum(coeff_apply(inp_adj[j], pull(z, rc[j])) for j in range(n))
        return (-coeff_apply(row.conj().T, eta) + back).reshape(nd * N, -1)

    return FockOperator((d * N, nd * N), apply, apply_adjoint)


def characteristic_system(T) -> TreeSystem:
    T = as_tuple(T)
    n, d, _ = T.shape
    df = defects(T)
    inp = np.array([df.delta_star[j * d:(j + 1) * d, :] for j in range(n)])
    state = np.array([t.conj().T for t in T])
    return TreeSystem(state, inp, df.delta, -row_matrix(T))


def characteristic_symbol(T, X) -> np.ndarray:
    """``Theta_T`` with the creation operators replaced by a tuple ``X`` of k x k matrices.

    Returns the ``dk x ndk`` matrix
    ``-T (x) I + (Delta_T (x) I)(I - sum T_j^* (x) X_j)^{-1} sum_j (E_j Delta_{T*}) (x) X_j``.
    """
    T, X = as_tuple(T), as_tuple(X)
    n, d, _ = T.shape
    if X.shape[0] != n:
        raise ValidationError("arity mismatch")
    k = X.shape[1]
    df = defects(T)
    eye = np.eye(d * k)
    res = eye - sum(np.kron(T[j].conj().T, X[j]) for j in range(n))
    drive = sum(np.kron(df.delta_star[j * d:(j + 1) * d, :], X[j]) for j in range(n))
    return -np.kron(row_matrix(T), np.eye(k)) + np.kron(df.delta, np.eye(k)) @ np.linalg.solve(res, drive)
