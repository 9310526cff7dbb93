"""Harnack domination, the norm of the intertwiner, and the hyperbolic distance.

``l_norm(A, B)`` is the norm of ``L_{B,A}``, which equals ``||C_A C_B^{-1}||``
for strict contractions.  Three evaluations are available:

* ``exact``: the untruncated norm from the storage LMI of the realization;
* ``truncated``: the level-K compression, by the horizon recursion (fast) or
  by an explicit Fock-space operator (``truncated_l_norm(..., route="fock")``);
* ``r-sweep``: for boundary tuples, the supremum over ``r -> 1`` of the
  strict-case value at ``(rA, rB)``.

The level-q kernel pencil gives the independent, necessary-condition bounds.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InconclusiveError, ValidationError
from .fock import FockBasis
from .kernels import circle_kernel, multi_toeplitz_block
from .numlin import min_pencil_constant, operator_norm, sqrt_psd
from .realization import TreeSystem, exact_norm, truncated_norm
from .rowop import (as_tuple, c_inverse_operator, c_operator, check_pair, defects,
                    is_strict, joint_spectral_radius, row_norm)

log = logging.getLogger(__name__)

SLACK = 1e-3
DEFAULT_KERNEL_LEVEL = 6
R_SWEEP = tuple(1 - 2.0**-j for j in range(1, 13))
PLATEAU_RTOL = 1e-4
CEILING = 1e6
BALL_TOL = 1e-10


def default_truncation(n: int) -> int:
    if n <= 2:
        return 14
    return int(math.floor(math.log(1e5) / math.log(n) + 1e-12))


def c_factor_system(A, B) -> TreeSystem:
    """Realization of ``C_A C_B^{-1}``; ``B`` must be a strict contraction."""
    A, B = check_pair(A, B)
    da, db = defects(A).delta, defects(B).delta
    db_inv = np.linalg.inv(db)
    state = np.array([a.conj().T for a in A])
    inp = np.array([(a.conj().T - b.conj().T) @ db_inv for a, b in zip(A, B)])
    return TreeSystem(state, inp, da, da @ db_inv)


def truncated_l_norm(A, B, K: int, route: str = "horizon") -> float:
    """``||P_K C_A C_B^{-1} P_K||`` for strict ``B``.

    ``route="fock"`` builds both factors on the truncated Fock space and takes
    the operator norm; ``route="horizon"`` runs the Riccati recursion.  They
    compute the same number.
    """
    A, B = check_pair(A, B)
    if not is_strict(B):
        raise ValidationError("the direct path needs a strict contraction B")
    if route == "horizon":
        return truncated_norm(c_factor_system(A, B), K)
    if route != "fock":
        raise ValidationError(f"unknown route {route!r}")
    basis = FockBasis(A.shape[0], K)
    op = c_inverse_operator(B, basis).then(c_operator(A, basis))
    return operator_norm(op)


@dataclass(frozen=True)
class LNormReport:
    value: float
    method: str                       # c-factorization | r-sweep | spectral-radius
    K: int | None = None
    truncated: float | None = None    # level-K compression (a lower bound)
    sweep: tuple = ()                 # (r, value) pairs for r-sweeps
    converged: bool = True
    lmi_residual: float | None = None

    def __float__(self):
        return self.value

    @property
    def lower(self) -> float:
        """Largest rigorous lower bound carried by the report."""
        vals = [v for _, v in self.sweep]
        if self.truncated is not None:
            vals.append(self.truncated)
        return max(vals, default=0.0)


def _direct(A, B, K: int | None) -> LNormReport:
    sys = c_factor_system(A, B)
    res = exact_norm(sys)
    trunc = truncated_norm(sys, K) if K is not None else None
    return LNormReport(res.value, "c-factorization", K, trunc, (), bool(np.isfinite(res.value)),
                       res.lmi_residual)


def l_norm_report(A, B, K: int | None = None, r_sweep=None, ceiling: float = CEILING,
                  plateau: float = PLATEAU_RTOL) -> LNormReport:
    """Norm of ``L_{B,A}`` with its provenance.

    ``K`` (default from :func:`default_truncation`) only sets the level of the
    truncated companion value; the main value is the untruncated norm.
    """
    A, B = check_pair(A, B)
    if row_norm(A) > 1 + BALL_TOL or row_norm(B) > 1 + BALL_TOL:
        raise ValidationError("both tuples must lie in the closed unit ball")
    if K is None:
        K = default_truncation(A.shape[0])
    if np.array_equal(A, B):
        return LNormReport(1.0, "c-factorization", K, 1.0)
    strict_b = is_strict(B)
    if strict_b:
        rA = joint_spectral_radius(A).value
        if rA < 1 - 1e-9:
            return _direct(A, B, K)
        # B is equivalent to 0 and A is not dominated by 0
        return LNormReport(np.inf, "spectral-radius", K, None, (), True)
    grid = tuple(r_sweep) if r_sweep is not None else R_SWEEP
    sweep = []
    prev = None
    converged = False
    for r in grid:
        rep = _direct(r * A, r * B, None)
        sweep.append((float(r), rep.value))
        if not np.isfinite(rep.value) or rep.value > ceiling:
            return LNormReport(np.inf, "r-sweep", K, None, tuple(sweep), True)
        if prev is not None and abs(rep.value - prev) <= plateau * rep.value:
            converged = True
            break
        prev = rep.value
    return LNormReport(sweep[-1][1], "r-sweep", K, None, tuple(sweep), converged)


def l_norm(A, B, K: int | None = None, r_sweep=None) -> float:
    """``||L_{B,A}||``, i.e. ``||C_A C_B^{-1}||`` for strict tuples."""
    return l_norm_report(A, B, K, r_sweep).value


def kernel_constants(A, B, q_max: int, stop_above: float | None = None) -> list[float]:
    """Pencil constants of the level-q kernel sections for ``q = 1..q_max``."""
    A, B = check_pair(A, B)
    out = []
    for q in range(1, q_max + 1):
        c = min_pencil_constant(multi_toeplitz_block(A, q).matrix,
                                multi_toeplitz_block(B, q).matrix).c_min
        out.append(c)
        if stop_above is not None and c > stop_above:
            break
    return out


def min_constant_kernel(A, B, q: int) -> float:
    """Smallest ``c`` with ``K_A <= c^2 K_B`` on words of length ``<= q``."""
    if q < 1:
        raise ValidationError("q must be at least 1")
    A, B = check_pair(A, B)
    return min_pencil_constant(multi_toeplitz_block(A, q).matrix,
                               multi_toeplitz_block(B, q).matrix).c_min


@dataclass(frozen=True)
class DominationReport:
    dominated: str                  # "yes" | "no" | "inconclusive"
    c: float
    c_required: float
    method: str
    kernel_levels: tuple[float, ...] = ()
    l_report: LNormReport | None = None
    reason: str = ""
    residuals: dict = field(default_factory=dict)


def dominates(A, B, c: float, q: int = DEFAULT_KERNEL_LEVEL, slack: float = SLACK,
              K: int | None = None) -> DominationReport:
    """Tri-state test of ``A ≺_c B``.

    yes: the norm of the intertwiner is at most ``c``;
    no:  a kernel section (or a rigorous lower bound on the norm) exceeds
         ``c + slack``;
    otherwise inconclusive.
    """
    A, B = check_pair(A, B)
    if c < 1:
        raise ValidationError("c must be at least 1")
    if row_norm(B) > 1 + BALL_TOL:
        raise ValidationError("B must lie in the closed unit ball")
    if row_norm(A) > 1 + BALL_TOL:
        lam = np.linalg.eigvalsh(multi_toeplitz_block(A, 1).matrix).min()
        return DominationReport("no", c, np.inf, "kernel-pencil", (), None,
                                "level-1 kernel of A is not positive: A is outside the closed ball",
                                {"kernel_min_eigenvalue": float(lam)})
    rep = l_norm_report(A, B, K)
    levels = tuple(kernel_constants(A, B, q, stop_above=c + slack))
    worst = max(levels, default=1.0)
    if rep.value <= c * (1 + 1e-9):
        return DominationReport("yes", c, rep.value, rep.method, levels, rep,
                                "intertwiner norm within c")
    if worst > c + slack:
        q_hit = next(i + 1 for i, v in enumerate(levels) if v > c + slack)
        return DominationReport("no", c, rep.value, "kernel-pencil", levels, rep,
                                f"kernel section at level {q_hit} needs {worst:.6g}")
    if rep.method == "spectral-radius":
        return DominationReport("no", c, np.inf, "spectral-radius", levels, rep,
                                "joint spectral radius of A is not below 1")
    if rep.lower > c + slack:
        return DominationReport("no", c, rep.value, rep.method, levels, rep,
                                f"lower bound {rep.lower:.6g} exceeds c")
    return DominationReport("inconclusive", c, rep.value, rep.method, levels, rep,
                            "certificates straddle c")


@dataclass(frozen=True)
class DistanceReport:
    delta: float
    omega: float
    l_ab: float          # ||L_{A,B}||
    l_ba: float          # ||L_{B,A}||
    K: int
    method: str
    truncated_l_ab: float | None = None
    truncated_l_ba: float | None = None
    gap: float | None = None   # omega minus its level-K compression


def hyperbolic_delta(A, B, K: int | None = None, method: str = "exact",
                     assume_equivalent: bool = False) -> DistanceReport:
    """Hyperbolic distance ``ln max(||L_{A,B}||, ||L_{B,A}||)``.

    ``method="exact"`` uses untruncated norms (and still reports level-K
    values); ``method="truncated"`` uses the level-K compressions only.
    """
    A, B = check_pair(A, B)
    if K is None:
        K = default_truncation(A.shape[0])
    strict = is_strict(A) and is_strict(B)
    if not strict and not assume_equivalent:
        raise InconclusiveError("non-strict tuples need an explicit equivalence assumption")
    if method == "truncated":
        if not strict:
            raise ValidationError("truncated distances need strict tuples")
        l_ba = truncated_l_norm(A, B, K)
        l_ab = truncated_l_norm(B, A, K)
        omega = max(l_ab, l_ba)
        return DistanceReport(float(np.log(omega)), omega, l_ab, l_ba, K, method, l_ab, l_ba, 0.0)
    if method != "exact":
        raise ValidationError(f"unknown method {method!r}")
    rep_ba = l_norm_report(A, B, K)
    rep_ab = l_norm_report(B, A, K)
    omega = max(rep_ab.value, rep_ba.value)
    t_ab, t_ba = rep_ab.truncated, rep_ba.truncated
    gap = omega - max(t_ab, t_ba) if t_ab is not None and t_ba is not None else None
    delta = float(np.log(omega)) if omega > 0 else 0.0
    return DistanceReport(delta, omega, rep_ab.value, rep_ba.value, K,
                          "r-sweep" if not strict else "c-factorization", t_ab, t_ba, gap)


def _suciu_values(T, Tp, ts):
    d = T.shape[0]
    eye = np.eye(d)
    left = np.linalg.inv(sqrt_psd(eye - Tp.conj().T @ Tp))
    right = sqrt_psd(eye - T.conj().T @ T)
    z = np.exp(1j * np.asarray(ts))[:, None, None]
    num = eye - z * Tp.conj().T
    den = eye - z * T.conj().T
    mats = left @ num @ np.linalg.solve(den, np.broadcast_to(right, den.shape))
    return np.linalg.norm(mats, ord=2, axis=(1, 2))


def suciu_norm(T, Tp, grid: int = 4096) -> float:
    """Circle supremum of the single-operator formula for ``||L_{T',T}||``."""
    T = np.atleast_2d(np.asarray(T, dtype=complex))
    Tp = np.atleast_2d(np.asarray(Tp, dtype=complex))
    if T.shape != Tp.shape or T.shape[0] != T.shape[1]:
        raise ValidationError("T and Tp must be square of equal size")
    if np.linalg.norm(T, 2) >= 1 or np.linalg.norm(Tp, 2) >= 1:
        raise ValidationError("suciu_norm needs strict contractions")
    ts = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    vals = _suciu_values(T, Tp, ts)
    k = int(np.argmax(vals))
    h = 2 * np.pi / grid
    res = minimize_scalar(lambda t: -_suciu_values(T, Tp, [t])[0],
                          bounds=(ts[k] - h, ts[k] + h), method="bounded",
                          options={"xatol": 1e-12})
    return float(max(vals[k], -res.fun))


def circle_constant(T, Tp, radii=None, angles: int = 256) -> float:
    """Smallest ``c`` with ``K(z,T) <= c^2 K(z,Tp)`` over a polar grid of the disc."""
    T = np.atleast_2d(np.asarray(T, dtype=complex))
    Tp = np.atleast_2d(np.asarray(Tp, dtype=complex))
    if radii is None:
        radii = 1 - np.geomspace(0.5, 1e-3, 24)
    best = 0.0
    for rad in radii:
        for t in np.linspace(0, 2 * np.pi, angles, endpoint=False):
            z = rad * np.exp(1j * t)
            c = min_pencil_constant(circle_kernel(T, z), circle_kernel(Tp, z)).c_min
            best = max(best, c)
    return best


def is_dominated_by_zero(A) -> bool:
    """``A ≺ 0`` exactly when the joint spectral radius is below 1."""
    return joint_spectral_radius(as_tuple(A)).value < 1
