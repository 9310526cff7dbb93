import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_tuple
from nchyper.errors import ValidationError
from nchyper.fock import FockBasis
from nchyper.numlin import operator_norm
from nchyper.rowop import (as_tuple, c_inverse_operator, c_operator, defects, is_strict,
                           joint_spectral_radius, reconstruction_operator, row_norm, word_product)


def test_as_tuple_shapes():
    assert as_tuple([0.6, 0]).shape == (2, 1, 1)
    with pytest.raises(ValidationError):
        as_tuple(np.zeros((2, 2, 3)))
    with pytest.raises(ValidationError):
        as_tuple([np.nan])


def test_row_norm_examples():
    assert row_norm(np.zeros((2, 3, 3))) == 0
    assert row_norm([0.6, 0]) == pytest.approx(0.6)
    U = np.array([[0, 1], [1j, 0]])
    assert row_norm([U / np.sqrt(2), U / np.sqrt(2)]) == pytest.approx(1.0)
    assert is_strict([0.6, 0]) and not is_strict([0.6, 0.8])


def test_word_products(rng):
    X = random_tuple(rng, 2, 3, 0.9)
    assert np.allclose(word_product(X, ()), np.eye(3))
    assert np.allclose(word_product(X, (1, 2)), X[0] @ X[1])
    N = np.array([[[0, 1], [0, 0]], [[0, 2], [0, 0]]])
    for alpha in [(1, 1), (1, 2), (2, 1), (2, 2, 1)]:
        assert np.all(word_product(N, alpha) == 0)


def test_defect_examples():
    df = defects(np.zeros((2, 2, 2)))
    assert np.allclose(df.delta, np.eye(2)) and np.allclose(df.delta_star, np.eye(4))
    df = defects([0.6, 0])
    assert np.allclose(df.delta, [[0.8]]) and np.allclose(df.delta_star, np.diag([0.8, 1.0]))
    V = np.array([[1, 0], [0, 0]]), np.array([[0, 0], [0, 1]])   # row coisometry
    assert np.allclose(defects(V).delta, 0, atol=1e-7)
    with pytest.raises(ValidationError):
        defects([0.9, 0.9])


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 3))
def test_defect_identities(seed, n, d):
    rng = np.random.default_rng(seed)
    X = random_tuple(rng, n, d, rng.uniform(0.1, 1.0))
    df = defects(X)
    row = np.hstack(list(X))
    assert np.abs(df.delta @ df.delta - (np.eye(d) - row @ row.conj().T)).max() < 1e-10
    assert np.abs(df.delta_star @ df.delta_star - (np.eye(n * d) - row.conj().T @ row)).max() < 1e-10


def test_reconstruction_operator_examples():
    basis = FockBasis(1, 4)
    assert np.allclose(reconstruction_operator([0.0], basis).dense(), 0)
    lam = 0.3 + 0.4j
    R = reconstruction_operator([lam], basis).dense()
    assert np.allclose(R, np.conj(lam) * np.eye(5, k=-1))


@given(st.integers(0, 2**32 - 1))
def test_reconstruction_norm_bound_and_nilpotency(seed):
    rng = np.random.default_rng(seed)
    X = random_tuple(rng, 2, 2, 0.9)
    basis = FockBasis(2, 3)
    R = reconstruction_operator(X, basis).dense()
    # R^*R = sum X_i X_i^* (x) (projection onto interior levels)
    assert np.linalg.norm(R, 2) == pytest.approx(row_norm(X), rel=1e-10)
    assert np.allclose(np.linalg.matrix_power(R, basis.K + 1), 0)


def test_column_sum_is_not_a_bound_for_reconstruction_norm():
    X = np.array([[[1, 0], [0, 0]], [[0, 1], [0, 0]]]) / 2
    R = reconstruction_operator(X, FockBasis(2, 2)).dense()
    column = np.linalg.norm(sum(x.T @ x for x in X), 2) ** 0.5
    assert np.linalg.norm(R, 2) == pytest.approx(np.sqrt(2) / 2)
    assert column == pytest.approx(0.5)


def test_c_operator_of_zero_is_identity():
    basis = FockBasis(2, 3)
    assert np.allclose(c_operator(np.zeros((2, 2, 2)), basis).dense(), np.eye(2 * basis.dim))


@given(st.integers(0, 2**32 - 1))
def test_c_operator_inverse(seed):
    rng = np.random.default_rng(seed)
    X = random_tuple(rng, 2, 2, 0.8)
    basis = FockBasis(2, 4)
    C, Ci = c_operator(X, basis).dense(), c_inverse_operator(X, basis).dense()
    assert np.abs(C @ Ci - np.eye(C.shape[0])).max() < 1e-10
    assert np.abs(Ci @ C - np.eye(C.shape[0])).max() < 1e-10


def test_c_inverse_needs_invertible_defect():
    with pytest.raises(ValidationError):
        c_inverse_operator([0.6, 0.8], FockBasis(2, 2))


def test_truncated_c_inverse_grows_towards_closed_form():
    vals = [operator_norm(c_inverse_operator([0.6, 0.0], FockBasis(2, K))) for K in (2, 4, 6, 8)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 2.0


def test_spectral_radius_examples(rng):
    assert joint_spectral_radius([[[0, 1], [0, 0]]]).value == 0
    assert joint_spectral_radius([0.6, 0.0]).value == pytest.approx(0.6, abs=1e-12)
    lam = np.array([0.3 + 0.1j, -0.2, 0.5j])
    assert joint_spectral_radius(lam).value == pytest.approx(np.linalg.norm(lam), abs=1e-12)
    X = random_tuple(rng, 2, 3, 0.9)
    est = joint_spectral_radius(X)
    assert est.value <= row_norm(X) + 1e-8
    assert est.converged
    with pytest.raises(ValidationError):
        joint_spectral_radius(X, k_max=3)


def test_spectral_radius_matches_brute_force_power(rng):
    X = random_tuple(rng, 2, 2, 0.9)
    # oracle: sum over all words of length k, k = 10
    Phi = np.eye(2, dtype=complex)
    for _ in range(10):
        Phi = sum(x @ Phi @ x.conj().T for x in X)
    brute = np.linalg.norm(Phi, 2) ** (1 / 20)
    est = joint_spectral_radius(X)
    assert est.value <= brute + 1e-12
    assert est.terms[0] == pytest.approx(row_norm(X), rel=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(0.1, 3.0))
def test_spectral_radius_homogeneous(seed, t):
    rng = np.random.default_rng(seed)
    X = random_tuple(rng, 2, 3, 0.7)
    a, b = joint_spectral_radius(t * X).value, joint_spectral_radius(X).value
    assert a == pytest.approx(t * b, abs=1e-8)
