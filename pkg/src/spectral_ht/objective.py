"""Penalized weighted least-squares objective on the quotient manifold.

For a factor ``Z`` (p x K) with ``x(Z) = D^{-2} H*(Z Z^T)``::

    h(Z)    = 1/4 ||P_Omega(D^{-1} H*(Z Z^T)) - P_Omega(D y)||^2
              + mu/4 ||(I - G1)(Z Z^T)||_F^2 + mu/4 ||(I - G2)(Z Z^H)||_F^2
    psi(Z)  = 1/2 (||Z||_F^2 + ||Z^+||_F^2)
    hhat(Z) = h(Z) + lam * psi(Z)

The structure penalties are evaluated as ``||M||^2 - ||G M||^2``, where
``||M||^2`` comes from K x K Gram matrices and ``||G M||^2`` from the
FFT-computed (anti-)diagonal sums, so no p x p matrix is ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, RankDeficient
from .manifold import RANK_RTOL, FactorPoint, HorizontalTangent, _lift, _point
from .signals import ObservationSet
from .structured import (
    GramWeights,
    StructuredDims,
    fft_length,
    hankel_apply_spectra,
    hankel_gram_from_spectra,
    spectrum,
    toeplitz_apply_spectra,
    toeplitz_gram_from_spectra,
)

DEFAULT_LAMBDA = 1e-8


@dataclass(frozen=True)
class ProblemData:
    """Observed samples plus penalty settings for one recovery problem.

    Attributes
    ----------
    omega : ObservationSet
        1-based observed indices within ``1..n``.
    observed : ndarray
        ``P_Omega(y)``, ordered like ``omega.indices``.
    dims : StructuredDims
        Size ``p`` of the Hankel/Toeplitz blocks; ``2p - 1 >= n``.
    mu : float
        Structure penalty weight, the sampling ratio ``M / N`` by default.
    lam : float
        Weight of the regularizer ``psi``.
    """

    omega: ObservationSet
    observed: np.ndarray
    dims: StructuredDims
    weights: GramWeights
    mu: float
    lam: float

    @classmethod
    def build(cls, omega, observed, k, mu=None, lam=DEFAULT_LAMBDA, p=None):
        observed = np.asarray(observed, dtype=complex)
        if observed.shape != (omega.m,):
            raise DimensionMismatch(f"expected {omega.m} observed samples, got {observed.shape}")
        dims = StructuredDims(p) if p is not None else StructuredDims.for_signal(omega.n, k)
        if dims.length < omega.n:
            raise DimensionMismatch(f"2p - 1 = {dims.length} is shorter than n = {omega.n}")
        mu = omega.m / omega.n if mu is None else float(mu)
        if mu <= 0:
            raise ValueError("mu must be positive")
        if lam < 0:
            raise ValueError("lambda must be nonnegative")
        observed.setflags(write=False)
        return cls(omega, observed, dims, GramWeights.for_size(dims.p), mu, float(lam))

    @property
    def n(self):
        return self.omega.n

    @property
    def p(self):
        return self.dims.p

    @property
    def positions(self):
        return self.omega.positions

    @property
    def nfft(self):
        return fft_length(self.dims.p)

    @property
    def weighted_target(self):
        """``P_Omega(D y)``."""
        return self.weights.d[self.positions] * self.observed


@dataclass(frozen=True)
class LineSearchPoly:
    """Coefficients of ``phi(alpha) = h(Z + alpha xi) = sum_i c_i alpha^i``."""

    c0: float
    c1: float
    c2: float
    c3: float
    c4: float

    @property
    def coeffs(self):
        return np.array([self.c0, self.c1, self.c2, self.c3, self.c4])

    def __call__(self, alpha):
        return self.c0 + alpha * (self.c1 + alpha * (self.c2 + alpha * (self.c3 + alpha * self.c4)))

    def derivative(self, alpha):
        return self.c1 + alpha * (2 * self.c2 + alpha * (3 * self.c3 + alpha * 4 * self.c4))


def _check(data, z):
    z = _point(z)
    if z.shape[0] != data.p:
        raise DimensionMismatch(f"factor has {z.shape[0]} rows, problem needs p = {data.p}")
    return z


def _rsum(a, b):
    return float(np.sum(a * b).real)


def _structure_terms(data, z):
    """Shared pieces of h and its gradient at ``z``."""
    p = data.p
    d2 = data.weights.d_squared
    fz = spectrum(z, data.nfft)
    a0 = hankel_gram_from_spectra(fz, fz, p)
    b0 = toeplitz_gram_from_spectra(fz, fz, p)
    pos = data.positions
    resid = a0[pos] / data.weights.d[pos] - data.weighted_target
    g = z.conj().T @ z
    return fz, a0, b0, resid, g, d2


def eval_h(data, z):
    """Objective ``h`` at the class of ``z`` (no rank check)."""
    zz = z.z if isinstance(z, FactorPoint) else np.asarray(z, dtype=complex)
    if zz.ndim != 2 or zz.shape[0] != data.p:
        raise DimensionMismatch(f"factor must have p = {data.p} rows, got shape {zz.shape}")
    _, a0, b0, resid, g, d2 = _structure_terms(data, zz)
    fit = 0.25 * float(np.vdot(resid, resid).real)
    # both differences are >= 0 in exact arithmetic; rounding can push them just below
    pen_h = max(_rsum(g, g) - float(np.sum(np.abs(a0) ** 2 / d2)), 0.0)
    pen_t = max(float(np.sum(np.abs(g) ** 2)) - float(np.sum(np.abs(b0) ** 2 / d2)), 0.0)
    return fit + 0.25 * data.mu * (pen_h + pen_t)


def eval_psi(z):
    """``1/2 (||Z||_F^2 + ||Z^+||_F^2)`` from the singular values of ``Z``."""
    zz = z.z if isinstance(z, FactorPoint) else np.asarray(z, dtype=complex)
    s = np.linalg.svd(zz, compute_uv=False)
    if s[-1] <= RANK_RTOL * s[0]:
        raise RankDeficient("psi is unbounded at a rank-deficient factor")
    return 0.5 * float(np.sum(s**2) + np.sum(s**-2.0))


def eval_hhat(data, z):
    """``h + lam psi``; ``inf`` when ``z`` is numerically rank deficient."""
    try:
        psi = eval_psi(z)
    except RankDeficient:
        return np.inf
    return eval_h(data, z) + data.lam * psi


def euclidean_gradient(data, z):
    """Gradient of ``hhat`` in C^{p x K} under ``<X, Y> = Re tr(X^H Y)``."""
    z = _check(data, z)
    zz = z.z
    p, mu = data.p, data.mu
    fz, a0, b0, resid, g, d2 = _structure_terms(data, zz)
    pos = data.positions
    # data-fit and Hankel-projection terms share one FFT application to conj(Z)
    w = -mu * a0 / d2
    w[pos] += resid / data.weights.d[pos]
    grad = hankel_apply_spectra(np.fft.fft(w, n=data.nfft), fz.conj(), p)
    grad -= mu * toeplitz_apply_spectra(np.fft.fft(b0 / d2, n=data.nfft), fz, p)
    grad += mu * (zz @ g.conj() + zz @ g)
    if data.lam > 0:
        u, s, vh = np.linalg.svd(zz, full_matrices=False)
        grad += data.lam * (u * (s - s**-3.0)) @ vh
    return grad


def riemannian_gradient(data, z):
    """Horizontal lift of the Riemannian gradient: ``grad_E Re{Z^H Z}^{-1}``."""
    z = _check(data, z)
    return HorizontalTangent(z.solve_gram_right(euclidean_gradient(data, z)), z)


def _quartic(q):
    """Coefficients of ``||v0 + a v1 + a^2 v2||^2`` from the Gram entries ``q[i][j]``."""
    return np.array(
        [q[0][0], 2 * q[0][1], q[1][1] + 2 * q[0][2], 2 * q[1][2], q[2][2]],
        dtype=float,
    )


def line_search_poly(data, z, xi):
    """Exact quartic ``phi(alpha) = h(Z + alpha xi)``."""
    z = _check(data, z)
    x = _lift(z, xi)
    zz = z.z
    p = data.p
    d = data.weights.d
    d2 = data.weights.d_squared
    pos = data.positions

    fz = spectrum(zz, data.nfft)
    fx = spectrum(x, data.nfft)
    a = [
        hankel_gram_from_spectra(fz, fz, p),
        2.0 * hankel_gram_from_spectra(fz, fx, p),
        hankel_gram_from_spectra(fx, fx, p),
    ]
    b = [
        toeplitz_gram_from_spectra(fz, fz, p),
        toeplitz_gram_from_spectra(fz, fx, p) + toeplitz_gram_from_spectra(fx, fz, p),
        toeplitz_gram_from_spectra(fx, fx, p),
    ]
    u = [a[0][pos] / d[pos] - data.weighted_target, a[1][pos] / d[pos], a[2][pos] / d[pos]]

    gzz = zz.conj().T @ zz
    gzx = zz.conj().T @ x
    gxz = gzx.conj().T
    gxx = x.conj().T @ x
    # Frobenius Gram entries of M0 = Z Z^T, M1 = Z xi^T + xi Z^T, M2 = xi xi^T
    fh = [
        [_rsum(gzz, gzz), 2 * _rsum(gzz, gzx), _rsum(gzx, gzx)],
        [None, 2 * _rsum(gzz, gxx) + 2 * _rsum(gzx, gxz), 2 * _rsum(gzx, gxx)],
        [None, None, _rsum(gxx, gxx)],
    ]
    # and of N0 = Z Z^H, N1 = Z xi^H + xi Z^H, N2 = xi xi^H
    ft = [
        [_rsum(gzz, gzz.conj()), 2 * _rsum(gzx, gzz.conj()), _rsum(gzx, gzx.conj())],
        [None, 2 * _rsum(gzz, gxx.conj()) + 2 * _rsum(gzx, gxz.conj()), 2 * _rsum(gzx, gxx.conj())],
        [None, None, _rsum(gxx, gxx.conj())],
    ]
    qd = [[0.0] * 3 for _ in range(3)]
    qh = [[0.0] * 3 for _ in range(3)]
    qt = [[0.0] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(i, 3):
            qd[i][j] = _rsum(u[i].conj(), u[j])
            qh[i][j] = fh[i][j] - _rsum(a[i].conj(), a[j] / d2)
            qt[i][j] = ft[i][j] - _rsum(b[i].conj(), b[j] / d2)
    c = 0.25 * _quartic(qd) + 0.25 * data.mu * (_quartic(qh) + _quartic(qt))
    return LineSearchPoly(*(float(v) for v in c))


class PinvNormRay:
    """``alpha -> ||(Z + alpha xi)^+||_F^2`` at O(K^3) per evaluation.

    With thin SVDs ``Z = U1 S1 V1^H``, ``xi = U2 S2 V2^H``,
    ``[U1 U2] = U3 S3 V3^H`` and ``[V1 V2] = U4 S4 V4^H`` one has
    ``Z + alpha xi = U3 (S3 V3^H diag(S1, alpha S2) V4 S4) U4^H`` with
    orthonormal outer factors, so only the small core matrix changes.
    """

    def __init__(self, z, xi):
        zz = z.z if isinstance(z, FactorPoint) else np.asarray(z, dtype=complex)
        x = xi.xi if isinstance(xi, HorizontalTangent) else np.asarray(xi, dtype=complex)
        k = zz.shape[1]
        u1, s1, v1h = np.linalg.svd(zz, full_matrices=False)
        u2, s2, v2h = np.linalg.svd(x, full_matrices=False)
        _, s3, v3h = np.linalg.svd(np.hstack([u1, u2]), full_matrices=False)
        _, s4, v4h = np.linalg.svd(np.hstack([v1h.conj().T, v2h.conj().T]), full_matrices=False)
        left = s3[:, None] * v3h
        right = v4h.conj().T * s4[None, :]
        self._c0 = (left[:, :k] * s1) @ right[:k]
        self._c1 = (left[:, k:] * s2) @ right[k:]
        self._norms = (float(s1[0]), float(s2[0]))

    def __call__(self, alpha):
        s = np.linalg.svd(self._c0 + alpha * self._c1, compute_uv=False)
        # cancellation (e.g. xi = -Z) leaves a core that is tiny but uniformly so
        scale = max(s[0], self._norms[0] + abs(alpha) * self._norms[1])
        if s[-1] <= RANK_RTOL * scale:
            raise RankDeficient(f"Z + {alpha} xi is numerically rank deficient")
        return float(np.sum(s**-2.0))


def pinv_norm_along_ray(z, xi, alpha):
    """``||(Z + alpha xi)^+||_F^2``; build :class:`PinvNormRay` to reuse the setup."""
    return PinvNormRay(z, xi)(alpha)


class HhatRay:
    """``alpha -> hhat(Z + alpha xi)`` from the quartic and the small-core pseudo-inverse.

    ``||Z + alpha xi||^2 = ||Z||^2 + 2 alpha <Z, xi> + alpha^2 ||xi||^2``.
    Rank-deficient trial points evaluate to ``inf``.
    """

    def __init__(self, data, z, xi, poly=None):
        z = _check(data, z)
        x = _lift(z, xi)
        self.lam = data.lam
        self.poly = line_search_poly(data, z, x) if poly is None else poly
        self._zz = float(np.vdot(z.z, z.z).real)
        self._zx = float(np.vdot(z.z, x).real)
        self._xx = float(np.vdot(x, x).real)
        self._pinv = PinvNormRay(z, x)

    def h(self, alpha):
        return self.poly(alpha)

    def __call__(self, alpha):
        try:
            pinv = self._pinv(alpha)
        except RankDeficient:
            return np.inf
        frob = self._zz + alpha * (2.0 * self._zx + alpha * self._xx)
        return self.poly(alpha) + 0.5 * self.lam * (frob + pinv)
