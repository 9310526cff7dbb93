"""Free polynomial maps with matrix coefficients and the Schwarz-Pick check."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .automorph import ball_point, harnack_closed_form, poincare_bergman
from .errors import InconclusiveError, ValidationError
from .fock import FockBasis, FockOperator, as_blocks, coeff_apply, push
from .harnack import hyperbolic_delta, l_norm_report
from .numlin import operator_norm
from .rowop import as_tuple, is_strict, word_product

CONTRACTIVE_TOL = 1e-8


@dataclass(frozen=True)
class FreeMap:
    """``F_j(X) = sum_alpha X_alpha (x) coeffs[(j, alpha)]`` for ``j < m``."""
    n: int
    m: int
    e: int
    coeffs: dict = field(default_factory=dict)   # (j, word) -> e x e matrix

    def __post_init__(self):
        if min(self.n, self.m, self.e) < 1:
            raise ValidationError("n, m and e must be positive")
        clean = {}
        for (j, word), A in self.coeffs.items():
            word = tuple(int(i) for i in word)
            A = np.asarray(A, dtype=complex).reshape(self.e, self.e)
            if not 0 <= j < self.m:
                raise ValidationError(f"output index {j} out of range")
            if any(not 1 <= i <= self.n for i in word):
                raise ValidationError(f"word {word} uses letters outside 1..{self.n}")
            if not np.all(np.isfinite(A)):
                raise ValidationError("coefficient has non-finite entries")
            key = (int(j), word)
            clean[key] = clean.get(key, 0) + A
        object.__setattr__(self, "coeffs", clean)

    @property
    def degree(self) -> int:
        return max((len(w) for _, w in self.coeffs), default=0)

    @classmethod
    def identity(cls, n: int) -> "FreeMap":
        return cls(n, n, 1, {(i, (i + 1,)): np.eye(1) for i in range(n)})

    @classmethod
    def constant(cls, n: int, values) -> "FreeMap":
        """Constant map whose output ``j`` is ``values[j]`` (e x e)."""
        vals = [np.atleast_2d(np.asarray(v, dtype=complex)) for v in values]
        return cls(n, len(vals), vals[0].shape[0], {(j, ()): v for j, v in enumerate(vals)})


def evaluate(F: FreeMap, X) -> np.ndarray:
    """``F(X)`` as an ``(m, d*e, d*e)`` array."""
    X = as_tuple(X)
    if X.shape[0] != F.n:
        raise ValidationError(f"map expects arity {F.n}, got {X.shape[0]}")
    d = X.shape[1]
    out = np.zeros((F.m, d * F.e, d * F.e), dtype=complex)
    cache = {}
    for (j, word), A in F.coeffs.items():
        if word not in cache:
            cache[word] = word_product(X, word)
        out[j] += np.kron(cache[word], A)
    return out


def row_at_right_creations(F: FreeMap, basis: FockBasis, r: float) -> FockOperator:
    """The row ``[F_1(rR) ... F_m(rR)]`` on the truncated ``F^2 (x) C^e``.

    ``X_alpha`` becomes the right creation that appends ``alpha``, which is
    unitarily equivalent to the left creation ``S_alpha``.
    """
    if basis.n != F.n:
        raise ValidationError("arity mismatch")
    e, N, m = F.e, basis.dim, F.m
    terms = [(j, (r ** len(w)) * A, basis.append_map(w)) for (j, w), A in F.coeffs.items()]

    def apply(V):
        blocks = as_blocks(V, m * e, N).reshape(m, e, N, -1)
        out = np.zeros((e, N, V.shape[1]), dtype=complex)
        for j, A, target in terms:
            out += coeff_apply(A, push(blocks[j], target))
        return out.reshape(e * N, -1)

    def apply_adjoint(V):
        x3 = as_blocks(V, e, N)
        out = np.zeros((m, e, N, V.shape[1]), dtype=complex)
        for j, A, target in terms:
            src = np.nonzero(target >= 0)[0]
            moved = np.zeros_like(x3)
            moved[:, src, :] = x3[:, target[src], :]
            out[j] += coeff_apply(A.conj().T, moved)
        return out.reshape(m * e * N, -1)

    return FockOperator((e * N, m * e * N), apply, apply_adjoint)


@dataclass(frozen=True)
class ContractivityBound:
    value: float   # lower bound on the sup norm of F
    r: float
    K: int

    def __float__(self):
        return self.value


def contractivity_bound(F: FreeMap, basis: FockBasis, r: float) -> ContractivityBound:
    """Norm of ``[F_1(rR) ... F_m(rR)]`` compressed to levels ``<= K``."""
    if not 0 < r < 1:
        raise ValidationError("r must lie in (0, 1)")
    op = row_at_right_creations(F, basis, r)
    return ContractivityBound(float(operator_norm(op)), float(r), basis.K)


@dataclass(frozen=True)
class SchwarzPickReport:
    delta_image: float          # delta(F(z), F(xi))
    delta_source: float         # delta(z, xi), computed numerically
    delta_closed_form: float    # Poincare-Bergman distance of z and xi
    l_image: float              # ||L_{F(z), F(xi)}||
    l_image_reverse: float      # ||L_{F(xi), F(z)}||
    l_closed_form: float        # ||L_{z, xi}|| in closed form
    delta_margin: float
    norm_margin: float
    delta_holds: bool
    norm_holds: bool
    contractivity: ContractivityBound | None
    K: int


def schwarz_pick_report(F: FreeMap, z, xi, basis: FockBasis | None = None, K: int | None = None,
                        tol: float = 2e-3, contractivity: ContractivityBound | None = None,
                        attested: bool = False) -> SchwarzPickReport:
    """Check that ``F`` does not increase the hyperbolic distance between ``z`` and ``xi``.

    ``F`` must pass the truncated contractivity test at ``r = 0.99`` (computed on
    ``basis`` unless a bound is supplied) or be attested contractive by the caller.
    """
    z, xi = ball_point(z), ball_point(xi)
    if z.size != F.n or xi.size != F.n:
        raise ValidationError("points must have the input arity of F")
    if np.linalg.norm(z) >= 1 or np.linalg.norm(xi) >= 1:
        raise ValidationError("points must lie in the open ball")
    if contractivity is None and basis is not None:
        contractivity = contractivity_bound(F, basis, 0.99)
    if contractivity is None and not attested:
        raise ValidationError("supply a basis, a contractivity bound or attested=True")
    if contractivity is not None and contractivity.value > 1 + CONTRACTIVE_TOL:
        raise ValidationError(f"F is not contractive: bound {contractivity.value:.6g}")
    fz, fxi = evaluate(F, z), evaluate(F, xi)
    if not (is_strict(fz) and is_strict(fxi)):
        raise InconclusiveError("F(z) or F(xi) is not a strict row contraction")
    if K is None:
        K = basis.K if basis is not None else 14
    image = hyperbolic_delta(fz, fxi, K)
    source = hyperbolic_delta(z, xi, K)
    closed_delta = poincare_bergman(z, xi)
    closed_l = harnack_closed_form(z, xi)
    l_img = l_norm_report(fxi, fz, K).value      # ||L_{F(z),F(xi)}||
    l_rev = l_norm_report(fz, fxi, K).value
    dm = source.delta - image.delta
    nm = closed_l - l_img
    return SchwarzPickReport(image.delta, source.delta, closed_delta, l_img, l_rev, closed_l,
                             dm, nm, dm >= -tol, nm >= -tol, contractivity, K)
