import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_ht import (
    DimensionMismatch,
    FactorPoint,
    HhatRay,
    ObservationSet,
    ProblemData,
    RankDeficient,
    eval_h,
    eval_hhat,
    eval_psi,
    fast_hankel_gram,
    generate_signal,
    gram_weights,
    line_search_poly,
    metric,
    observe,
    pinv_norm_along_ray,
    project_horizontal,
    riemannian_gradient,
)
from spectral_ht.objective import euclidean_gradient

from oracles import crandn, dense_h, dense_hhat, random_orthogonal, vandermonde_factor

seeds = st.integers(0, 2**31)


def random_problem(seed, p=None, k=None, lam=1e-2, full=False):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 4)) if k is None else k
    p = int(rng.integers(k + 2, 14)) if p is None else p
    n = 2 * p - 1 - int(rng.integers(0, 2))
    m = n if full else int(rng.integers(1, n + 1))
    omega = ObservationSet.random(n, m, rng_seed=seed)
    data = ProblemData.build(omega, crandn(rng, m), k, lam=lam, p=p)
    return rng, data, FactorPoint(crandn(rng, p, k))


def exact_problem(freqs, coeffs, n, lam=0.0):
    k = len(freqs)
    omega = ObservationSet.full(n)
    sig = generate_signal(freqs, coeffs, n)
    data = ProblemData.build(omega, observe(sig, omega), k, lam=lam)
    return data, FactorPoint(vandermonde_factor(freqs, coeffs, data.p))


def test_problem_data_defaults():
    omega = ObservationSet.random(20, 8, rng_seed=0)
    data = ProblemData.build(omega, np.ones(8), 3)
    assert data.mu == pytest.approx(0.4)
    assert data.lam == 1e-8
    assert data.p == 11
    with pytest.raises(DimensionMismatch):
        ProblemData.build(omega, np.ones(7), 3)
    with pytest.raises(ValueError):
        ProblemData.build(omega, np.ones(8), 3, lam=-1)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_h_matches_dense(seed):
    _, data, z = random_problem(seed)
    h = eval_h(data, z)
    assert h == pytest.approx(dense_h(data, z.z), rel=1e-10)
    assert h >= 0
    assert eval_hhat(data, z) == pytest.approx(dense_hhat(data, z.z), rel=1e-10)


def test_h_vanishes_at_exact_point():
    data, z = exact_problem([0.1, 0.37, 0.8], [1.5, -1j, 0.7 + 0.2j], 15)
    assert dense_h(data, z.z) <= 1e-18
    # the Gram-identity penalties carry a rounding floor of order eps ||Z Z^T||^2
    floor = 1e-14 * np.linalg.norm(z.z.T @ z.z) ** 2
    assert 0 <= eval_h(data, z) <= floor
    x = fast_hankel_gram(z.z, z.z) / gram_weights(data.p)
    fit = 0.25 * np.linalg.norm(data.weights.d[data.positions] * (x[data.positions] - data.observed)) ** 2
    assert fit <= 1e-18


def test_data_fit_zero_by_construction():
    rng = np.random.default_rng(2)
    p, k = 7, 2
    z = crandn(rng, p, k)
    omega = ObservationSet.random(13, 9, rng_seed=2)
    x = fast_hankel_gram(z, z) / gram_weights(p)
    data = ProblemData.build(omega, x[omega.positions], k, lam=0.0)
    h = eval_h(data, FactorPoint(z))
    mu_free = ProblemData.build(omega, x[omega.positions], k, lam=0.0, mu=1e-300)
    assert eval_h(mu_free, FactorPoint(z)) == pytest.approx(0, abs=1e-12)
    assert h >= 0


def test_psi_examples():
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(crandn(rng, 6, 3))
    assert eval_psi(FactorPoint(q)) == pytest.approx(3)
    u = q[:, :1]
    assert eval_psi(FactorPoint(2 * u)) == pytest.approx(2.125)
    with pytest.raises(RankDeficient):
        eval_psi(np.column_stack([u, u]))


def test_hhat_examples():
    _, data, z = random_problem(4, lam=0.0)
    assert eval_hhat(data, z) == eval_h(data, z)
    exact, z_star = exact_problem([0.2, 0.6], [1.0, 2.0j], 11, lam=1e-8)
    assert eval_hhat(exact, z_star) == pytest.approx(1e-8 * eval_psi(z_star), rel=1e-6)
    assert eval_hhat(data, np.zeros(z.shape)) == np.inf
    _, data2, z2 = random_problem(5, lam=0.3)
    assert eval_hhat(data2, z2) >= eval_h(data2, z2)
    assert eval_hhat(data2, z2) >= 0.3 * eval_psi(z2)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_orbit_invariance_of_objective(seed):
    rng, data, z = random_problem(seed)
    o = random_orthogonal(rng, z.shape[1])
    zo = FactorPoint(z.z @ o)
    assert eval_h(data, zo) == pytest.approx(eval_h(data, z), rel=1e-10)
    assert eval_psi(zo) == pytest.approx(eval_psi(z), rel=1e-12)
    assert eval_hhat(data, zo) == pytest.approx(eval_hhat(data, z), rel=1e-10)
    g = riemannian_gradient(data, z).xi
    go = riemannian_gradient(data, zo).xi
    np.testing.assert_allclose(go, g @ o, atol=1e-9 * np.linalg.norm(g))


def fd_relative_errors(data, z, rng, directions=10):
    grad = riemannian_gradient(data, z)
    errs = []
    for _ in range(directions):
        xi = project_horizontal(z, crandn(rng, *z.shape)).xi
        t = 1e-4 * np.linalg.norm(z.z) / np.linalg.norm(xi)
        fd = (dense_hhat(data, z.z + t * xi) - dense_hhat(data, z.z - t * xi)) / (2 * t)
        exact = metric(z, grad, xi)
        errs.append(abs(fd - exact) / max(abs(exact), 1e-12 * abs(dense_hhat(data, z.z))))
    return errs


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_gradient_finite_differences(seed):
    rng, data, z = random_problem(seed, p=8, k=2)
    assert max(fd_relative_errors(data, z, rng)) <= 1e-5


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_gradient_is_horizontal(seed):
    _, data, z = random_problem(seed)
    g = riemannian_gradient(data, z)
    scale = np.linalg.norm(z.z) ** 2 * np.linalg.norm(g.xi)
    assert g.horizontality_defect() <= 1e-10 * scale


def test_gradient_at_exact_point():
    data, z = exact_problem([0.11, 0.52], [1.0, 1.5 - 0.5j], 13)
    g = riemannian_gradient(data, z).xi
    assert np.linalg.norm(g) <= 1e-10 * np.linalg.norm(z.z) ** 3


def test_gradient_regularizer_only():
    lam = 1e-3
    data, z = exact_problem([0.3, 0.9], [2.0, 1j], 13, lam=lam)
    u, s, vh = np.linalg.svd(z.z, full_matrices=False)
    # derivative of 1/2 sum(s^2 + s^-2) is s - s^-3
    expected = lam * (u * (s - s**-3.0)) @ vh @ np.linalg.inv(z.gram)
    np.testing.assert_allclose(riemannian_gradient(data, z).xi, expected, atol=1e-9 * np.linalg.norm(expected))


def test_euclidean_gradient_dimension_check():
    _, data, _ = random_problem(0, p=6, k=2)
    with pytest.raises(DimensionMismatch):
        euclidean_gradient(data, FactorPoint(np.eye(5)[:, :2]))


def test_line_search_poly_examples():
    rng, data, z = random_problem(7)
    poly = line_search_poly(data, z, np.zeros(z.shape))
    assert poly.c1 == poly.c2 == poly.c3 == poly.c4 == 0
    assert poly.c0 == pytest.approx(eval_h(data, z), rel=1e-12)
    xi = crandn(rng, *z.shape)
    poly = line_search_poly(data, z, xi)
    assert poly(0.0) == pytest.approx(eval_h(data, z), rel=1e-12)
    assert poly.c4 >= 0 and poly.c0 >= 0
    eps = 1e-6
    assert poly.derivative(0.3) == pytest.approx((poly(0.3 + eps) - poly(0.3 - eps)) / (2 * eps), rel=1e-6)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_line_search_poly_exact(seed):
    rng, data, z = random_problem(seed)
    xi = project_horizontal(z, crandn(rng, *z.shape)).xi
    poly = line_search_poly(data, z, xi)
    for a in rng.uniform(-2, 2, size=5):
        direct = eval_h(data, z.z + a * xi)
        assert abs(poly(a) - direct) <= 1e-8 * (1 + abs(direct))
        assert abs(poly(a) - dense_h(data, z.z + a * xi)) <= 1e-8 * (1 + abs(direct))


def test_pinv_ray_examples():
    rng = np.random.default_rng(9)
    z = crandn(rng, 16, 3)
    base = np.linalg.norm(np.linalg.pinv(z)) ** 2
    assert pinv_norm_along_ray(z, crandn(rng, 16, 3), 0.0) == pytest.approx(base, rel=1e-10)
    assert pinv_norm_along_ray(z, np.zeros((16, 3)), 4.0) == pytest.approx(base, rel=1e-10)
    with pytest.raises(RankDeficient):
        pinv_norm_along_ray(z, -z, 1.0)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_pinv_ray_matches_dense(seed):
    rng = np.random.default_rng(seed)
    z, xi = crandn(rng, 16, 3), crandn(rng, 16, 3)
    for a in (0.1, 1.0, 5.0):
        dense = np.linalg.norm(np.linalg.pinv(z + a * xi)) ** 2
        assert pinv_norm_along_ray(z, xi, a) == pytest.approx(dense, rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_hhat_ray_matches_direct(seed):
    rng, data, z = random_problem(seed)
    xi = crandn(rng, *z.shape)
    ray = HhatRay(data, z, xi)
    for a in rng.uniform(-1, 1, size=3):
        direct = eval_hhat(data, z.z + a * xi)
        assert ray(a) == pytest.approx(direct, rel=1e-8, abs=1e-8)
