"""Automorphisms of the unit ball and their free extensions to matrix tuples."""

from __future__ import annotations

import numpy as np

from .errors import NumericalError, ValidationError
from .numlin import sqrt_psd
from .rowop import as_tuple

SINGULAR_TOL = 1e-12


def ball_point(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.size == 0 or not np.all(np.isfinite(z)):
        raise ValidationError("ball point must be a nonempty finite vector")
    return z


def _inner(z, a) -> complex:
    """``<z, a>``, linear in ``z``."""
    return complex(np.vdot(a, z))


def mobius(a, z) -> np.ndarray:
    """The involutive automorphism of the ball that swaps ``a`` and ``0``."""
    a, z = ball_point(a), ball_point(z)
    if a.shape != z.shape:
        raise ValidationError("points live in different dimensions")
    na2 = float(np.vdot(a, a).real)
    if na2 >= 1:
        raise ValidationError("parameter must lie in the open ball")
    if np.vdot(z, z).real > 1 + 1e-12:
        raise ValidationError("argument must lie in the closed ball")
    denom = 1 - _inner(z, a)
    if abs(denom) < SINGULAR_TOL:
        raise NumericalError("automorphism is singular at this point")
    s = np.sqrt(1 - na2)
    proj = (_inner(z, a) / na2) * a if na2 > 0 else np.zeros_like(z)
    return (a - proj - s * (z - proj)) / denom


def identity_defect(a, z) -> float:
    """``(1 - ||a||^2)(1 - ||z||^2) - (1 - ||phi_a(z)||^2)|1 - <z,a>|^2``; zero in exact arithmetic."""
    a, z = ball_point(a), ball_point(z)
    w = mobius(a, z)
    lhs = (1 - np.vdot(w, w).real) * abs(1 - _inner(z, a)) ** 2
    return float((1 - np.vdot(a, a).real) * (1 - np.vdot(z, z).real) - lhs)


def pseudo_hyperbolic(z, xi) -> float:
    """``||phi_z(xi)||``."""
    return float(np.linalg.norm(mobius(z, xi)))


def poincare_bergman(z, xi) -> float:
    """Poincare-Bergman distance ``(1/2) ln((1 + t)/(1 - t))`` with ``t = ||phi_z(xi)||``."""
    return float(np.arctanh(pseudo_hyperbolic(z, xi)))


def harnack_closed_form(z, xi) -> float:
    """Harnack constant between two points of the ball, ``sqrt((1 + t)/(1 - t))``."""
    t = pseudo_hyperbolic(z, xi)
    return float(np.sqrt((1 + t) / (1 - t)))


def free_automorphism(lam, X) -> np.ndarray:
    """Apply the free extension of the ball automorphism at ``lam`` to a tuple ``X``.

    Output ``j`` is ``lam_j I - s (I - sum conj(lam_i) X_i)^{-1} sum_i X_i D[i, j]``
    where ``s = sqrt(1 - ||lam||^2)`` and ``D = (I - lam^* lam)^{1/2}`` is the
    ``n x n`` defect of the scalar row ``lam``.
    """
    lam = ball_point(lam)
    X = as_tuple(X)
    n, d, _ = X.shape
    if lam.size != n:
        raise ValidationError("parameter and tuple differ in arity")
    na2 = float(np.vdot(lam, lam).real)
    if na2 >= 1:
        raise ValidationError("parameter must lie in the open ball")
    s = np.sqrt(1 - na2)
    D = sqrt_psd(np.eye(n) - np.outer(lam.conj(), lam))
    eye = np.eye(d)
    res = eye - np.einsum("i,iab->ab", lam.conj(), X)
    if np.linalg.svd(res, compute_uv=False).min() < SINGULAR_TOL:
        raise NumericalError("resolvent is singular at this tuple")
    mixed = np.einsum("iab,ij->jab", X, D)
    return lam[:, None, None] * eye - s * np.linalg.solve(res[None], mixed)


def unitary_action(X, U) -> np.ndarray:
    """Right-multiply the row ``[X_1 ... X_n]`` by the scalar unitary ``U``."""
    X = as_tuple(X)
    U = np.asarray(U, dtype=complex)
    n = X.shape[0]
    if U.shape != (n, n):
        raise ValidationError("unitary has the wrong size")
    if not np.allclose(U.conj().T @ U, np.eye(n), atol=1e-10):
        raise ValidationError("matrix is not unitary")
    return np.einsum("iab,ij->jab", X, U)
