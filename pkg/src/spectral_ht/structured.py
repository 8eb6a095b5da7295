"""Square Hankel/Toeplitz operators, their adjoints and FFT fast paths.

A generating vector ``x`` of length ``2p - 1`` defines the p x p matrices

    H(x)[i1, i2] = x[i1 + i2 - 1]        (1-based)
    T(t)[i1, i2] = t[i1 - i2 + p]

In 0-based numpy terms that is ``H[i, j] = x[i + j]`` and
``T[i, j] = t[i - j + p - 1]``.  Both adjoints sum (anti-)diagonals and share
the Gram operator ``H*H = T*T = diag(d_squared)`` with
``d_squared = [1, 2, ..., p, ..., 2, 1]``.

Functions taking a pair of factors accept either p-vectors or p x K
matrices.  For matrices the result is the sum over columns, i.e.
``fast_hankel_gram(A, B) = H*(A B^T)`` and ``fast_toeplitz_gram(A, B) =
T*(A B^H)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True)
class StructuredDims:
    """Side ``p`` of the square structured matrices; ``length = 2p - 1``."""

    p: int

    def __post_init__(self):
        if self.p < 2:
            raise DimensionMismatch(f"p must be >= 2, got {self.p}")

    @property
    def length(self):
        return 2 * self.p - 1

    @classmethod
    def for_signal(cls, n, k=1):
        """``p = max(ceil((N + 1) / 2), K + 1)``; samples past N stay unobserved."""
        return cls(max(math.ceil((n + 1) / 2), k + 1, 2))


@dataclass(frozen=True)
class GramWeights:
    d: np.ndarray
    d_squared: np.ndarray

    @classmethod
    def for_size(cls, p):
        d2 = gram_weights(p)
        return cls(np.sqrt(d2), d2)


def gram_weights(p):
    """Anti-diagonal lengths ``[1, 2, ..., p, ..., 2, 1]`` of a p x p matrix."""
    up = np.arange(1, p + 1, dtype=float)
    return np.concatenate([up, up[-2::-1]])


def fft_length(p):
    """Smallest power of two holding a length ``2p - 1`` linear convolution."""
    return 1 << (2 * p - 2).bit_length()


def _side_from_length(n):
    if n < 3 or n % 2 == 0:
        raise DimensionMismatch(f"generating vector must have odd length 2p-1 >= 3, got {n}")
    return (n + 1) // 2


def _square(m):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def hankel_from_vector(x):
    x = np.asarray(x)
    if x.ndim != 1:
        raise DimensionMismatch("generating vector must be 1-D")
    p = _side_from_length(x.size)
    i = np.arange(p)
    return x[i[:, None] + i[None, :]]


def toeplitz_from_vector(t):
    t = np.asarray(t)
    if t.ndim != 1:
        raise DimensionMismatch("generating vector must be 1-D")
    p = _side_from_length(t.size)
    i = np.arange(p)
    return t[i[:, None] - i[None, :] + p - 1]


def hankel_adjoint(m):
    """Anti-diagonal sums of a square matrix."""
    m = _square(m)
    p = m.shape[0]
    # anti-diagonals of m are the diagonals of its left-right flip
    flipped = m[:, ::-1]
    return np.array([np.trace(flipped, offset=off) for off in range(p - 1, -p, -1)])


def toeplitz_adjoint(m):
    """Diagonal sums of a square matrix, starting at the top-right corner."""
    m = _square(m)
    p = m.shape[0]
    return np.array([np.trace(m, offset=off) for off in range(p - 1, -p, -1)])


def _as_columns(*arrays):
    out = []
    for a in arrays:
        a = np.asarray(a)
        if a.ndim == 1:
            a = a[:, None]
        elif a.ndim != 2:
            raise DimensionMismatch(f"expected a vector or a p x K matrix, got shape {a.shape}")
        out.append(a)
    if any(o.shape != out[0].shape for o in out):
        raise DimensionMismatch(f"factor shapes differ: {[o.shape for o in out]}")
    return out


def spectrum(z, nfft):
    """Column-wise zero-padded FFT, shape (nfft, K)."""
    return np.fft.fft(z, n=nfft, axis=0)


def hankel_gram_from_spectra(fa, fb, p):
    """``H*(A B^T)`` given column spectra of A and B."""
    s = fa * fb
    if s.ndim == 2:
        s = s.sum(axis=1)
    return np.fft.ifft(s)[: 2 * p - 1]


def toeplitz_gram_from_spectra(fa, fb, p):
    """``T*(A B^H)`` given column spectra of A and B."""
    s = fa * fb.conj()
    if s.ndim == 2:
        s = s.sum(axis=1)
    c = np.fft.ifft(s)
    return c[(np.arange(2 * p - 1) - (p - 1)) % c.size]


def fast_hankel_gram(z_a, z_b):
    """``H*(z_a z_b^T)``: the full linear convolution of the two factors."""
    a, b = _as_columns(z_a, z_b)
    p = a.shape[0]
    n = fft_length(p)
    return hankel_gram_from_spectra(spectrum(a, n), spectrum(b, n), p)


def fast_toeplitz_gram(z_a, z_b):
    """``T*(z_a z_b^H)``: cross-correlation of ``z_a`` with ``z_b``."""
    a, b = _as_columns(z_a, z_b)
    p = a.shape[0]
    n = fft_length(p)
    return toeplitz_gram_from_spectra(spectrum(a, n), spectrum(b, n), p)


def hankel_apply_spectra(fx, fw_conj, p):
    """``H(x) W`` from ``fft(x)`` and ``conj(fft(conj(W)))``.

    ``H(x) w`` is the correlation ``sum_j x[i + j] w[j]``; with a transform
    length of at least ``2p - 1`` no circular wrap reaches rows ``0..p-1``.
    """
    if fw_conj.ndim == 2:
        fx = fx[:, None]
    return np.fft.ifft(fx * fw_conj, axis=0)[:p]


def toeplitz_apply_spectra(ft, fw, p):
    """``T(t) W`` from ``fft(t)`` and ``fft(W)``: rows ``p-1..2p-2`` of ``t * w``."""
    if fw.ndim == 2:
        ft = ft[:, None]
    return np.fft.ifft(ft * fw, axis=0)[p - 1 : 2 * p - 1]


def _matvec_args(x, w):
    x = np.asarray(x)
    w = np.asarray(w)
    if x.ndim != 1:
        raise DimensionMismatch("generating vector must be 1-D")
    p = _side_from_length(x.size)
    if w.shape[0] != p or w.ndim > 2:
        raise DimensionMismatch(f"operand must have {p} rows, got shape {w.shape}")
    return x, w, p, fft_length(p)


def hankel_matvec(x, w):
    """``H(x) @ w`` without forming H(x); ``w`` may be a vector or a matrix."""
    x, w, p, n = _matvec_args(x, w)
    fw = np.fft.fft(w.conj(), n=n, axis=0).conj()
    return hankel_apply_spectra(np.fft.fft(x, n=n), fw, p)


def toeplitz_matvec(t, w):
    """``T(t) @ w`` without forming T(t)."""
    t, w, p, n = _matvec_args(t, w)
    return toeplitz_apply_spectra(np.fft.fft(t, n=n), np.fft.fft(w, n=n, axis=0), p)


def g1_residual_product(z):
    """``(I - G1)(Z Z^T) conj(Z)`` with G1 the projector onto Hankel matrices."""
    (z,) = _as_columns(z)
    p = z.shape[0]
    n = fft_length(p)
    fz = spectrum(z, n)
    a0 = hankel_gram_from_spectra(fz, fz, p) / gram_weights(p)
    return z @ (z.T @ z.conj()) - hankel_apply_spectra(np.fft.fft(a0, n=n), fz.conj(), p)


def g2_residual_product(z):
    """``(I - G2)(Z Z^H) Z`` with G2 the projector onto Toeplitz matrices."""
    (z,) = _as_columns(z)
    p = z.shape[0]
    n = fft_length(p)
    fz = spectrum(z, n)
    b0 = toeplitz_gram_from_spectra(fz, fz, p) / gram_weights(p)
    return z @ (z.conj().T @ z) - toeplitz_apply_spectra(np.fft.fft(b0, n=n), fz, p)
