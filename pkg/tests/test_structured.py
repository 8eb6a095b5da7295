import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_ht import (
    DimensionMismatch,
    StructuredDims,
    fast_hankel_gram,
    fast_toeplitz_gram,
    g1_residual_product,
    g2_residual_product,
    gram_weights,
    hankel_adjoint,
    hankel_from_vector,
    hankel_matvec,
    toeplitz_adjoint,
    toeplitz_from_vector,
    toeplitz_matvec,
)
from spectral_ht.structured import GramWeights, fft_length

from oracles import crandn, dense_hankel_adjoint, dense_toeplitz_adjoint, g1, g2, vandermonde_factor

sizes = st.integers(2, 64)
seeds = st.integers(0, 2**31)


def test_hankel_examples():
    np.testing.assert_array_equal(hankel_from_vector(np.array([1, 2, 3])), [[1, 2], [2, 3]])
    np.testing.assert_array_equal(hankel_from_vector(np.zeros(3)), np.zeros((2, 2)))
    np.testing.assert_array_equal(
        hankel_from_vector(np.arange(1, 6)), [[1, 2, 3], [2, 3, 4], [3, 4, 5]]
    )


def test_toeplitz_examples():
    np.testing.assert_array_equal(toeplitz_from_vector(np.array([1, 2, 3])), [[2, 1], [3, 2]])
    np.testing.assert_array_equal(toeplitz_from_vector(np.array([0, 1, 0])), np.eye(2))
    np.testing.assert_array_equal(
        toeplitz_from_vector(np.arange(1, 6)), [[3, 2, 1], [4, 3, 2], [5, 4, 3]]
    )


def test_adjoint_examples():
    np.testing.assert_array_equal(hankel_adjoint(np.array([[1, 2], [2, 3]])), [1, 4, 3])
    np.testing.assert_array_equal(hankel_adjoint(np.eye(2)), [1, 0, 1])
    np.testing.assert_array_equal(toeplitz_adjoint(np.array([[2, 1], [3, 2]])), [1, 4, 3])
    np.testing.assert_array_equal(toeplitz_adjoint(np.eye(2)), [0, 2, 0])


@pytest.mark.parametrize("bad", [np.zeros(4), np.zeros(1), np.zeros((3, 1))])
def test_builders_reject_bad_length(bad):
    with pytest.raises(DimensionMismatch):
        hankel_from_vector(bad)
    with pytest.raises(DimensionMismatch):
        toeplitz_from_vector(bad)


def test_adjoints_reject_non_square():
    with pytest.raises(DimensionMismatch):
        hankel_adjoint(np.zeros((2, 3)))
    with pytest.raises(DimensionMismatch):
        toeplitz_adjoint(np.zeros((2, 3)))


def test_dims_and_weights():
    assert StructuredDims(3).length == 5
    with pytest.raises(DimensionMismatch):
        StructuredDims(1)
    assert StructuredDims.for_signal(70, 6).p == 36
    assert StructuredDims.for_signal(32, 1).p == 17
    assert StructuredDims.for_signal(8, 6).p == 7
    w = GramWeights.for_size(4)
    np.testing.assert_array_equal(w.d_squared, [1, 2, 3, 4, 3, 2, 1])
    np.testing.assert_allclose(w.d, [1, np.sqrt(2), np.sqrt(3), 2, np.sqrt(3), np.sqrt(2), 1])
    assert fft_length(33) >= 65 and fft_length(2) == 4


@settings(max_examples=100, deadline=None)
@given(seeds, sizes)
def test_adjoint_identities(seed, p):
    rng = np.random.default_rng(seed)
    x, m = crandn(rng, 2 * p - 1), crandn(rng, p, p)
    for build, adj, ref in [
        (hankel_from_vector, hankel_adjoint, dense_hankel_adjoint),
        (toeplitz_from_vector, toeplitz_adjoint, dense_toeplitz_adjoint),
    ]:
        lhs = np.vdot(build(x), m)
        rhs = np.vdot(x, adj(m))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs)) * p
        np.testing.assert_allclose(adj(m), ref(m), atol=1e-12 * p)


@settings(max_examples=100, deadline=None)
@given(seeds, sizes)
def test_gram_identity(seed, p):
    rng = np.random.default_rng(seed)
    x = crandn(rng, 2 * p - 1)
    d2 = gram_weights(p)
    np.testing.assert_allclose(hankel_adjoint(hankel_from_vector(x)), d2 * x, atol=1e-12 * p)
    np.testing.assert_allclose(toeplitz_adjoint(toeplitz_from_vector(x)), d2 * x, atol=1e-12 * p)


def test_gram_identity_columnwise():
    p = 5
    eye = np.eye(2 * p - 1)
    hh = np.column_stack([hankel_adjoint(hankel_from_vector(e)) for e in eye])
    tt = np.column_stack([toeplitz_adjoint(toeplitz_from_vector(e)) for e in eye])
    np.testing.assert_array_equal(hh, np.diag(gram_weights(p)))
    np.testing.assert_array_equal(tt, np.diag(gram_weights(p)))


@settings(max_examples=100, deadline=None)
@given(seeds, sizes)
def test_projectors(seed, p):
    rng = np.random.default_rng(seed)
    a, b = crandn(rng, p, p), crandn(rng, p, p)
    for g in (g1, g2):
        ga = g(a)
        np.testing.assert_allclose(g(ga), ga, atol=1e-10 * np.linalg.norm(a))
        assert abs(np.vdot(g(a), b) - np.vdot(a, g(b))) <= 1e-10 * np.linalg.norm(a) * np.linalg.norm(b)
    x = crandn(rng, 2 * p - 1)
    np.testing.assert_allclose(g1(hankel_from_vector(x)), hankel_from_vector(x), atol=1e-13 * p)
    np.testing.assert_allclose(g2(toeplitz_from_vector(x)), toeplitz_from_vector(x), atol=1e-13 * p)


def test_fast_gram_examples():
    np.testing.assert_allclose(fast_hankel_gram(np.ones(2), np.ones(2)), [1, 2, 1], atol=1e-15)
    np.testing.assert_allclose(fast_hankel_gram(np.array([1, 0]), np.array([0, 1])), [0, 1, 0], atol=1e-15)
    np.testing.assert_allclose(fast_toeplitz_gram(np.ones(2), np.ones(2)), [1, 2, 1], atol=1e-15)
    np.testing.assert_allclose(fast_toeplitz_gram(np.array([1, 0]), np.array([0, 1])), [1, 0, 0], atol=1e-15)


def test_fast_gram_length_mismatch():
    with pytest.raises(DimensionMismatch):
        fast_hankel_gram(np.ones(3), np.ones(4))
    with pytest.raises(DimensionMismatch):
        fast_toeplitz_gram(np.ones(3), np.ones(4))


def _rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


@settings(max_examples=100, deadline=None)
@given(seeds, sizes, st.integers(1, 4))
def test_fast_paths_match_dense(seed, p, k):
    rng = np.random.default_rng(seed)
    a, b = crandn(rng, p, k), crandn(rng, p, k)
    assert _rel(fast_hankel_gram(a, b), dense_hankel_adjoint(a @ b.T)) <= 1e-10
    assert _rel(fast_toeplitz_gram(a, b), dense_toeplitz_adjoint(a @ b.conj().T)) <= 1e-10
    x, w = crandn(rng, 2 * p - 1), crandn(rng, p, k)
    assert _rel(hankel_matvec(x, w), hankel_from_vector(x) @ w) <= 1e-10
    assert _rel(toeplitz_matvec(x, w), toeplitz_from_vector(x) @ w) <= 1e-10
    assert _rel(hankel_matvec(x, w[:, 0]), hankel_from_vector(x) @ w[:, 0]) <= 1e-10
    m1, m2 = a @ a.T, a @ a.conj().T
    # the residual can vanish identically (e.g. p = 2, k = 1), so scale by ||a||^3
    scale = 1e-10 * np.linalg.norm(a) ** 3
    assert np.linalg.norm(g1_residual_product(a) - (m1 - g1(m1)) @ a.conj()) <= scale
    assert np.linalg.norm(g2_residual_product(a) - (m2 - g2(m2)) @ a) <= scale


@settings(max_examples=50, deadline=None)
@given(seeds, sizes)
def test_gram_symmetries(seed, p):
    rng = np.random.default_rng(seed)
    a, b = crandn(rng, p), crandn(rng, p)
    np.testing.assert_allclose(fast_hankel_gram(a, b), fast_hankel_gram(b, a), atol=1e-12 * p)
    t = fast_toeplitz_gram(a, a)
    np.testing.assert_allclose(t, t[::-1].conj(), atol=1e-12 * p)


def test_matvec_examples():
    np.testing.assert_allclose(hankel_matvec(np.array([1, 2, 3]), np.array([1, 0])), [1, 2], atol=1e-15)
    np.testing.assert_allclose(hankel_matvec(np.zeros(3), np.array([4, 5])), [0, 0], atol=0)
    w = np.array([2 - 1j, 3j])
    np.testing.assert_allclose(toeplitz_matvec(np.array([0, 1, 0]), w), w, atol=1e-15)
    np.testing.assert_allclose(toeplitz_matvec(np.array([1, 2, 3]), np.array([1, 0])), [2, 3], atol=1e-15)
    with pytest.raises(DimensionMismatch):
        hankel_matvec(np.ones(5), np.ones(2))


def test_residual_products_vanish_on_structured_factors():
    p = 9
    z = vandermonde_factor([0.17], [1.3 - 0.4j], p)
    assert np.abs(g1_residual_product(z)).max() <= 1e-10
    assert np.abs(g2_residual_product(z)).max() <= 1e-10
    e1 = np.zeros((p, 1))
    e1[0] = 1
    assert np.abs(g1_residual_product(e1)).max() == pytest.approx(0, abs=1e-15)
