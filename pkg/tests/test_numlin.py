import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from nchyper.errors import ValidationError
from nchyper.fock import FockOperator
from nchyper.numlin import (least_squares_solve, min_pencil_constant, operator_norm, power_norm,
                            sqrt_psd)


def rand_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rand_psd(rng, d, rank=None):
    G = rand_complex(rng, d, rank or d)
    return G @ G.conj().T


def test_operator_norm_small_examples():
    assert operator_norm(np.array([[0, 1], [0, 0]])) == pytest.approx(1.0)
    assert operator_norm(np.diag([3, -4j])) == pytest.approx(4.0)


def test_matrix_free_paths_match_dense(rng):
    M = rand_complex(rng, 40, 40)
    dense = sla.svdvals(M)[0]   # oracle
    op = FockOperator.from_matrix(M)
    assert abs(operator_norm(op, method="power") - dense) <= 1e-8 * dense
    assert abs(operator_norm(op, method="lanczos") - dense) <= 1e-8 * dense
    assert abs(operator_norm(op) - dense) <= 1e-8 * dense


def test_operator_norm_rejects_bad_arguments():
    with pytest.raises(ValidationError):
        operator_norm(np.eye(2), tol=0)
    with pytest.raises(ValidationError):
        operator_norm(np.eye(2), method="magic")


def test_power_norm_reports_last_iterate():
    from nchyper.errors import NumericalError
    M = np.diag([1.0, 1.0 - 1e-9, 0.5])
    try:
        power_norm(M, tol=1e-16, maxiter=3)
    except NumericalError as exc:
        assert exc.last_iterate is not None
    else:
        pytest.fail("expected non-convergence")


@given(st.integers(0, 2**32 - 1))
def test_norm_subadditive_and_submultiplicative(seed):
    rng = np.random.default_rng(seed)
    A, B = rand_complex(rng, 6, 6), rand_complex(rng, 6, 6)
    na, nb = operator_norm(A), operator_norm(B)
    assert operator_norm(A + B) <= na + nb + 1e-8
    assert operator_norm(A @ B) <= na * nb + 1e-8


def test_pencil_examples():
    assert min_pencil_constant(np.eye(3), np.eye(3)).c_min == pytest.approx(1.0)
    assert min_pencil_constant(np.eye(3), 4 * np.eye(3)).c_min == pytest.approx(0.5)
    assert min_pencil_constant(np.diag([0.0, 1.0]), np.diag([1.0, 0.0])).c_min == np.inf


def test_pencil_against_generalized_eigenvalues(rng):
    P, Q = rand_psd(rng, 7) - 2 * np.eye(7), rand_psd(rng, 7) + np.eye(7)
    oracle = np.sqrt(sla.eigh(P, Q, eigvals_only=True)[-1])
    res = min_pencil_constant(P, Q)
    assert res.c_min == pytest.approx(oracle, rel=1e-10)
    assert np.linalg.eigvalsh(res.c_min**2 * Q - P).min() >= -1e-9


def test_pencil_with_singular_q_and_negative_null_part(rng):
    # Q vanishes on the last coordinate where P is strictly negative: finite answer
    # obtained from the Schur complement; oracle by a bisection on the PSD test
    Q = np.diag([2.0, 1.0, 0.0]).astype(complex)
    P = np.array([[1.0, 0.2, 0.5], [0.2, 0.5, 0.1], [0.5, 0.1, -1.0]], dtype=complex)
    lo, hi = 0.0, 10.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if np.linalg.eigvalsh(mid**2 * Q - P).min() >= 0:
            hi = mid
        else:
            lo = mid
    assert min_pencil_constant(P, Q).c_min == pytest.approx(hi, rel=1e-8)


def test_pencil_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        min_pencil_constant(np.array([[0, 1], [0, 0]]), np.eye(2))
    with pytest.raises(ValidationError):
        min_pencil_constant(np.eye(2), -np.eye(2))


@given(st.integers(0, 2**32 - 1))
def test_pencil_monotone_in_p(seed):
    rng = np.random.default_rng(seed)
    P, Q = rand_psd(rng, 5) - np.eye(5), rand_psd(rng, 5) + 0.1 * np.eye(5)
    bigger = P + rand_psd(rng, 5, rank=2)
    assert min_pencil_constant(bigger, Q).c_min >= min_pencil_constant(P, Q).c_min - 1e-10


def test_sqrt_examples(rng):
    assert np.allclose(sqrt_psd(np.eye(3)), np.eye(3))
    assert np.allclose(sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    M = rand_psd(rng, 8)
    R = sqrt_psd(M)
    assert np.abs(R @ R - M).max() <= 1e-10 * np.linalg.norm(M, 2)
    with pytest.raises(ValidationError):
        sqrt_psd(np.diag([1.0, -1.0]))


@given(st.integers(0, 2**32 - 1))
def test_sqrt_commutes_with_unitary_conjugation(seed):
    rng = np.random.default_rng(seed)
    M = rand_psd(rng, 5)
    U, _ = np.linalg.qr(rand_complex(rng, 5, 5))
    lhs = sqrt_psd(U @ M @ U.conj().T)
    rhs = U @ sqrt_psd(M) @ U.conj().T
    assert np.abs(lhs - rhs).max() <= 1e-10 * max(1.0, np.linalg.norm(M, 2))


def test_least_squares_examples(rng):
    A = rand_complex(rng, 4, 4)
    B = rand_complex(rng, 4, 2)
    X, res = least_squares_solve(A, B)
    assert res <= 1e-12 * max(1, np.linalg.norm(B, 2)) * 10
    X0, res0 = least_squares_solve(np.zeros((3, 3)), np.ones((3, 1)))
    assert np.all(X0 == 0) and res0 == pytest.approx(np.sqrt(3))


def test_least_squares_rank_deficient_matches_projection(rng):
    A = rand_complex(rng, 6, 2) @ rand_complex(rng, 2, 5)
    B = rand_complex(rng, 6, 3)
    Q, _ = np.linalg.qr(A @ rand_complex(rng, 5, 2))      # basis of range(A)
    oracle = np.linalg.norm(B - Q @ (Q.conj().T @ B), 2)
    X, res = least_squares_solve(A, B)
    assert res == pytest.approx(oracle, abs=1e-9)
    # minimum norm: X has no component in the null space of A
    Ah = np.linalg.pinv(A) @ A
    assert np.allclose(Ah @ X, X, atol=1e-9)
