import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_ball_point, random_tuple
from nchyper.automorph import (free_automorphism, harnack_closed_form, identity_defect, mobius,
                               poincare_bergman, unitary_action)
from nchyper.errors import ValidationError
from nchyper.harnack import hyperbolic_delta, l_norm
from nchyper.rowop import row_norm


def test_mobius_swaps_parameter_and_origin(rng):
    a = random_ball_point(rng, 3, 0.9)
    assert np.allclose(mobius(a, np.zeros(3)), a)
    assert np.allclose(mobius(a, a), 0, atol=1e-15)


def test_mobius_at_origin_is_negation(rng):
    z = random_ball_point(rng, 2, 1.0)
    assert np.allclose(mobius(np.zeros(2), z), -z)


def test_mobius_frozen_example():
    # (1 - 0.25)(1 - 0.09) / |1 - 0|^2
    w = mobius([0.5, 0.0], [0.0, 0.3])
    assert 1 - np.linalg.norm(w) ** 2 == pytest.approx(0.6825, abs=1e-15)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_mobius_involution_and_identity(seed, n):
    rng = np.random.default_rng(seed)
    a, z = random_ball_point(rng, n, 0.95), random_ball_point(rng, n, 1.0)
    assert np.allclose(mobius(a, mobius(a, z)), z, atol=1e-10)
    assert abs(identity_defect(a, z)) < 1e-12


def test_mobius_validation():
    with pytest.raises(ValidationError):
        mobius([1.0, 0.0], [0.0, 0.0])
    with pytest.raises(ValidationError):
        mobius([0.1, 0.0], [1.0, 1.0])
    with pytest.raises(ValidationError):
        mobius([0.1], [0.0, 0.0])


def test_closed_forms_agree():
    z, xi = [0.6, 0.0], [0.0, 0.0]
    assert poincare_bergman(z, xi) == pytest.approx(np.log(2))
    assert harnack_closed_form(z, xi) == pytest.approx(2.0)


def test_free_automorphism_at_zero_is_parameter():
    lam = np.array([0.2 + 0.1j, -0.5])
    out = free_automorphism(lam, np.zeros((2, 3, 3)))
    assert np.allclose(out, lam[:, None, None] * np.eye(3))


@given(st.integers(0, 2**32 - 1))
def test_free_automorphism_is_an_involution(seed):
    rng = np.random.default_rng(seed)
    lam = random_ball_point(rng, 2, 0.9)
    X = random_tuple(rng, 2, 3, rng.uniform(0.05, 0.99))
    assert np.abs(free_automorphism(lam, free_automorphism(lam, X)) - X).max() < 1e-10


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_free_automorphism_on_scalars_is_mobius(seed, n):
    rng = np.random.default_rng(seed)
    lam, x = random_ball_point(rng, n, 0.95), random_ball_point(rng, n, 0.99)
    assert np.abs(free_automorphism(lam, x).ravel() - mobius(lam, x)).max() < 1e-12


@given(st.integers(0, 2**32 - 1))
def test_free_automorphism_preserves_strict_contractions(seed):
    rng = np.random.default_rng(seed)
    lam = random_ball_point(rng, 2, 0.95)
    X = random_tuple(rng, 2, 2, rng.uniform(0.0, 0.999))
    assert row_norm(free_automorphism(lam, X)) < 1 - 1e-10


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=4)
def test_distance_and_norm_invariance(seed):
    rng = np.random.default_rng(seed)
    lam = random_ball_point(rng, 2, 0.6)
    A, B = random_tuple(rng, 2, 2, 0.5), random_tuple(rng, 2, 2, 0.4)
    PA, PB = free_automorphism(lam, A), free_automorphism(lam, B)
    assert hyperbolic_delta(PA, PB, K=8).delta == pytest.approx(hyperbolic_delta(A, B, K=8).delta, abs=2e-3)
    assert l_norm(PA, PB) == pytest.approx(l_norm(A, B), abs=2e-3)


def test_unitary_action(rng):
    X = random_tuple(rng, 2, 2, 0.7)
    U = np.array([[0, 1], [1j, 0]])
    Y = unitary_action(X, U)
    assert np.allclose(Y[0], 1j * X[1]) and np.allclose(Y[1], X[0])
    assert row_norm(Y) == pytest.approx(row_norm(X))
    assert l_norm(unitary_action(X, U), unitary_action(np.zeros_like(X), U)) == pytest.approx(
        l_norm(X, np.zeros_like(X)), abs=1e-6)
    with pytest.raises(ValidationError):
        unitary_action(X, np.ones((2, 2)))
