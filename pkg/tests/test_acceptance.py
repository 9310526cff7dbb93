"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, random_ball_point, random_tuple
from nchyper.automorph import free_automorphism, poincare_bergman
from nchyper.dilation import intertwiner, minimal_isometric_dilation, verify_intertwining
from nchyper.fock import FockBasis
from nchyper.harnack import (c_factor_system, dominates, hyperbolic_delta, kernel_constants, l_norm,
                             suciu_norm)
from nchyper.holomap import FreeMap, contractivity_bound, schwarz_pick_report
from nchyper.kernels import poisson_factorization_residual
from nchyper.realization import exact_norm
from nchyper.rowop import joint_spectral_radius

SEED = 20240601


def verdict(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} [{number:2d}] {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def strict_pairs(count, n, d, max_norm, seed):
    rng = np.random.default_rng(seed)
    return [(random_tuple(rng, n, d, rng.uniform(0.1, max_norm)),
             random_tuple(rng, n, d, rng.uniform(0.1, max_norm))) for _ in range(count)]


@pytest.fixture(scope="module")
def pairs_2x2():
    return strict_pairs(20, 2, 2, 0.6, SEED + 3)


def test_scalar_distance_matches_poincare_bergman():
    rng = np.random.default_rng(SEED + 1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        z, xi = random_ball_point(rng, 2, 0.7), random_ball_point(rng, 2, 0.7)
        got = hyperbolic_delta(z[:, None, None], xi[:, None, None], K=14).delta
        worst = max(worst, abs(got - poincare_bergman(z, xi)))
    elapsed = time.perf_counter() - start
    verdict(1, "scalar distance vs Poincare-Bergman", worst <= 1e-3 and elapsed <= 60,
            f"max error {worst:.2e} (tol 1e-3), {elapsed:.1f}s (limit 60s)")


def test_closed_form_factor_norms():
    lam = np.array([0.6, 0.0])[:, None, None]
    zero = np.zeros_like(lam)
    # ||C_lam|| = ||C_lam C_0^{-1}||, ||C_lam^{-1}|| = ||C_0 C_lam^{-1}||
    c_norm = exact_norm(c_factor_system(lam, zero)).value
    c_inv = exact_norm(c_factor_system(zero, lam)).value
    delta = hyperbolic_delta(lam, zero, K=20).delta
    errs = (abs(c_inv - 2), abs(c_norm - 2), abs(delta - np.log(2)))
    verdict(2, "closed-form factor norms at (0.6, 0)", max(errs) <= 1e-3,
            f"||C^-1||={c_inv:.6f} ||C||={c_norm:.6f} delta={delta:.6f} (tol 1e-3)")


def test_intertwiner_norm_and_residual(pairs_2x2):
    basis = FockBasis(2, 14)
    worst_norm = worst_res = 0.0
    for A, B in pairs_2x2:
        L = intertwiner(A, B, basis)
        worst_norm = max(worst_norm, abs(L.norm().value - l_norm(A, B)))
        res = verify_intertwining(L, minimal_isometric_dilation(A, basis),
                                  minimal_isometric_dilation(B, basis), basis.K - 2)
        worst_res = max(worst_res, res)
    verdict(3, "intertwiner norm vs factor norm", worst_norm <= 1e-3 and worst_res <= 1e-9,
            f"max norm gap {worst_norm:.2e} (tol 1e-3), max residual {worst_res:.2e} (tol 1e-9)")


def test_kernel_pencil_convergence(pairs_2x2):
    monotone, worst = True, 0.0
    for A, B in pairs_2x2:
        levels = kernel_constants(A, B, 8)
        monotone &= all(b >= a for a, b in zip(levels, levels[1:]))
        worst = max(worst, abs(levels[-1] - l_norm(A, B, K=16)))
    verdict(4, "kernel pencil constants", monotone and worst <= 5e-2,
            f"monotone={monotone}, max gap at q=8 {worst:.2e} (tol 5e-2)")


def test_single_operator_formula():
    rng = np.random.default_rng(SEED + 5)
    worst = 0.0
    for _ in range(20):
        T = random_tuple(rng, 1, 2, rng.uniform(0.1, 0.8))
        Tp = random_tuple(rng, 1, 2, rng.uniform(0.1, 0.8))
        worst = max(worst, abs(suciu_norm(T[0], Tp[0]) - l_norm(T, Tp, K=18)))
    scalar = l_norm([[[0.5]]], [[[0.0]]], K=18)
    ok = worst <= 1e-3 and abs(scalar - np.sqrt(3)) <= 1e-4
    verdict(5, "one-variable circle formula", ok,
            f"max gap {worst:.2e} (tol 1e-3), scalar {scalar:.8f} vs sqrt(3) (tol 1e-4)")


def test_poisson_factorization():
    rng = np.random.default_rng(SEED + 6)
    worst = 0.0
    for n, d, K in ((1, 2, 10), (2, 2, 6), (2, 3, 5), (3, 2, 4)):
        X = random_tuple(rng, n, d, rng.uniform(0.3, 0.95))
        worst = max(worst, poisson_factorization_residual(X, FockBasis(n, K)))
    verdict(6, "Poisson kernel factorization", worst <= 1e-12, f"max relative error {worst:.2e} (tol 1e-12)")


def test_automorphism_invariance():
    rng = np.random.default_rng(SEED + 7)
    lams = [random_ball_point(rng, 2, 0.8) for _ in range(5)]
    worst = worst_inv = 0.0
    for _ in range(20):
        z, xi = (random_ball_point(rng, 2, 0.7)[:, None, None] for _ in range(2))
        before = hyperbolic_delta(z, xi, K=14).delta
        for lam in lams:
            after = hyperbolic_delta(free_automorphism(lam, z), free_automorphism(lam, xi), K=14).delta
            worst = max(worst, abs(after - before))
    for lam in lams:
        X = random_tuple(rng, 2, 3, rng.uniform(0.1, 0.95))
        worst_inv = max(worst_inv, np.abs(free_automorphism(lam, free_automorphism(lam, X)) - X).max())
    verdict(7, "automorphism invariance", worst <= 2e-3 and worst_inv <= 1e-10,
            f"max distance change {worst:.2e} (tol 2e-3), involution error {worst_inv:.2e} (tol 1e-10)")


def test_schwarz_pick():
    rng = np.random.default_rng(SEED + 8)
    s = 2 ** -0.5
    F = FreeMap(2, 1, 1, {(0, (1,)): [[s]], (0, (2,)): [[s]]})
    ident = FreeMap.identity(2)
    bound_f = contractivity_bound(F, FockBasis(2, 8), 0.99)
    bound_id = contractivity_bound(ident, FockBasis(2, 8), 0.99)
    margin, eq_gap = np.inf, 0.0
    for _ in range(50):
        z, xi = random_ball_point(rng, 2, 0.7), random_ball_point(rng, 2, 0.7)
        margin = min(margin, schwarz_pick_report(F, z, xi, K=14, contractivity=bound_f).delta_margin)
    for _ in range(5):
        z, xi = random_ball_point(rng, 2, 0.7), random_ball_point(rng, 2, 0.7)
        rep = schwarz_pick_report(ident, z, xi, K=14, contractivity=bound_id)
        eq_gap = max(eq_gap, abs(rep.delta_margin))
    verdict(8, "Schwarz-Pick inequality", margin >= -2e-3 and eq_gap <= 2e-3,
            f"min margin {margin:.2e} (>= -2e-3), identity gap {eq_gap:.2e} (tol 2e-3)")


def test_harnack_part_of_zero():
    N = np.array([[[0.0, 1.0], [0.0, 0.0]]])
    zero = np.zeros_like(N)
    levels = kernel_constants(N, zero, 10)
    nil = dominates(N, zero, 2.0, q=10)
    nil_ok = nil.dominated == "yes" and max(levels) <= 2.0 and np.ptp(levels[1:]) <= 1e-8
    rng = np.random.default_rng(SEED + 9)
    rejected = 0
    for k in range(10):
        n = 1 + k % 2
        X = random_tuple(rng, n, 2, 1.0)
        X *= rng.uniform(1.05, 1.5) / joint_spectral_radius(X).value
        rep = dominates(X, np.zeros_like(X), 2.0, q=10)
        rejected += rep.dominated == "no"
    verdict(9, "Harnack part of zero", nil_ok and rejected == 10,
            f"nilpotent {nil.dominated} with kernel levels <= {max(levels):.6f}; "
            f"{rejected}/10 tuples with r >= 1.05 rejected")


def test_metric_axioms_at_truncation():
    rng = np.random.default_rng(SEED + 10)
    K = 8
    asym = 0.0
    margin = np.inf
    for _ in range(20):
        A, B, C = (random_tuple(rng, 2, 2, rng.uniform(0.1, 0.8)) for _ in range(3))
        ab = hyperbolic_delta(A, B, K, method="truncated").delta
        ba = hyperbolic_delta(B, A, K, method="truncated").delta
        bc = hyperbolic_delta(B, C, K, method="truncated").delta
        ac = hyperbolic_delta(A, C, K, method="truncated").delta
        asym = max(asym, abs(ab - ba))
        margin = min(margin, ab + bc - ac)
    verdict(10, "metric axioms at fixed truncation", asym == 0.0 and margin >= -1e-12,
            f"symmetry gap {asym:.1e}, min triangle margin {margin:.2e} (>= -1e-12)")
