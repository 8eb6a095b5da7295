"""Takagi factorization ``A = U diag(s) U^T`` of complex symmetric matrices."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NotSymmetric

SYMMETRY_RTOL = 1e-12
CLUSTER_RTOL = 1e-6


def _takagi_block(c):
    """Takagi factors of a small symmetric block whose singular values are all positive.

    Writing ``C = X + iY`` and ``u = a + ib``, the equation ``C conj(u) = s u``
    is the real symmetric eigenproblem ``[[X, Y], [Y, -X]] [a; b] = s [a; b]``,
    whose spectrum is ``{+s_i} U {-s_i}``.  The eigenvectors for the positive
    half give orthonormal complex Takagi vectors, repeated values included.
    """
    k = c.shape[0]
    x, y = c.real, c.imag
    emb = np.block([[x, y], [y, -x]])
    w, vecs = np.linalg.eigh(emb)
    top = vecs[:, k:][:, ::-1]
    return top[:k] + 1j * top[k:], w[k:][::-1]


def takagi(a, cluster_rtol=CLUSTER_RTOL):
    """Takagi factorization of a complex symmetric matrix.

    Parameters
    ----------
    a : (n, n) array_like
        Complex symmetric matrix, ``a == a.T`` to ``1e-12 ||a||``.
    cluster_rtol : float
        Consecutive singular values closer than this (relative) are treated
        as one repeated value and factorized together.

    Returns
    -------
    u : (n, n) ndarray
        Unitary matrix.
    s : (n,) ndarray
        Nonnegative values in nonincreasing order with ``a = u diag(s) u^T``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - a.T) > SYMMETRY_RTOL * scale:
        raise NotSymmetric("matrix is not complex symmetric")
    if scale == 0:
        return np.eye(n, dtype=complex), np.zeros(n)
    a = 0.5 * (a + a.T)

    v, s, _ = np.linalg.svd(a)
    zero_tol = n * np.finfo(float).eps * s[0]
    u = np.empty((n, n), dtype=complex)
    sig = np.empty(n)

    start = 0
    while start < n:
        stop = start + 1
        if s[start] <= zero_tol:
            stop = n
        else:
            while stop < n and s[stop] > zero_tol and s[stop - 1] - s[stop] <= cluster_rtol * s[start]:
                stop += 1
        vc = v[:, start:stop]
        if s[start] <= zero_tol:
            # null space: any orthonormal basis works
            u[:, start:stop] = vc
            sig[start:stop] = s[start:stop]
        else:
            # compress onto the cluster; span(conj(W_c)) = span(V_c) for symmetric a
            c = vc.conj().T @ a @ vc.conj()
            q, sc = _takagi_block(0.5 * (c + c.T))
            u[:, start:stop] = vc @ q
            sig[start:stop] = sc
        start = stop

    order = np.argsort(-sig, kind="stable")
    return u[:, order], np.maximum(sig[order], 0.0)
