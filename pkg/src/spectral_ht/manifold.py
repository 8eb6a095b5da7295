"""Quotient geometry of full-rank complex p x K factors modulo real rotations.

A point ``Z`` represents the class ``[Z] = {Z O : O real orthogonal}``.  The
metric at ``Z`` is ``g_Z(xi, zeta) = tr(Re{Z^H Z} Re{xi^H zeta})``; the
vertical space is ``{Z W : W real skew-symmetric}`` and tangent vectors are
represented by their horizontal lifts.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg

from .errors import BaseMismatch, DimensionMismatch, NotOrthogonal, RankDeficient

RANK_RTOL = 1e-12


def _check_rank(z):
    s = np.linalg.svd(z, compute_uv=False)
    if s.size == 0 or not np.all(np.isfinite(s)) or s[-1] <= RANK_RTOL * s[0]:
        raise RankDeficient(f"factor is numerically rank deficient (singular values {s})")
    return s


class FactorPoint:
    """A full-column-rank representative ``Z`` of the class ``[Z]``.

    The real Gram matrix ``Re{Z^H Z}`` and its Cholesky factor are computed
    on first use and cached; instances are treated as immutable.
    """

    __slots__ = ("z", "_gram", "_cho")

    def __init__(self, z, check=True):
        z = np.array(z, dtype=complex)
        if z.ndim != 2:
            raise DimensionMismatch(f"factor must be a p x K matrix, got shape {z.shape}")
        if z.shape[1] >= z.shape[0]:
            raise DimensionMismatch(f"need K < p, got shape {z.shape}")
        if check:
            _check_rank(z)
        z.setflags(write=False)
        self.z = z
        self._gram = None
        self._cho = None

    @property
    def shape(self):
        return self.z.shape

    @property
    def gram(self):
        """``Re{Z^H Z}``, symmetric positive definite."""
        if self._gram is None:
            g = (self.z.conj().T @ self.z).real
            self._gram = 0.5 * (g + g.T)
        return self._gram

    def solve_gram_right(self, x):
        """``x @ Re{Z^H Z}^{-1}`` through a Cholesky factorization."""
        if self._cho is None:
            try:
                self._cho = linalg.cho_factor(self.gram)
            except linalg.LinAlgError as exc:
                raise RankDeficient("Gram matrix Re{Z^H Z} is not positive definite") from exc
        return linalg.cho_solve(self._cho, x.T).T

    def singular_values(self):
        return np.linalg.svd(self.z, compute_uv=False)

    def __repr__(self):
        return f"FactorPoint(shape={self.z.shape})"


class HorizontalTangent:
    """Horizontal lift ``xi`` at ``base``; mixing bases raises BaseMismatch."""

    __slots__ = ("xi", "base")

    def __init__(self, xi, base):
        xi = np.asarray(xi, dtype=complex)
        if xi.shape != base.shape:
            raise DimensionMismatch(f"tangent shape {xi.shape} differs from base {base.shape}")
        self.xi = xi
        self.base = base

    def __neg__(self):
        return HorizontalTangent(-self.xi, self.base)

    def __mul__(self, a):
        return HorizontalTangent(a * self.xi, self.base)

    __rmul__ = __mul__

    def __add__(self, other):
        return HorizontalTangent(self.xi + _lift(self.base, other), self.base)

    def __sub__(self, other):
        return HorizontalTangent(self.xi - _lift(self.base, other), self.base)

    def horizontality_defect(self):
        """Norm of the antisymmetric part of ``Re{Z^H Z} Re{xi^H Z}``."""
        s = self.base.gram @ (self.xi.conj().T @ self.base.z).real
        return float(np.linalg.norm(s - s.T))


def _lift(base, v):
    if isinstance(v, HorizontalTangent):
        if v.base is not base:
            raise BaseMismatch("tangent vector belongs to a different base point")
        return v.xi
    v = np.asarray(v)
    if v.shape != base.shape:
        raise DimensionMismatch(f"tangent shape {v.shape} differs from base {base.shape}")
    return v


def _point(z):
    return z if isinstance(z, FactorPoint) else FactorPoint(z)


def metric(base, xi, zeta):
    """``tr(Re{Z^H Z} Re{xi^H zeta})``."""
    base = _point(base)
    a = _lift(base, xi)
    b = _lift(base, zeta)
    return float(np.sum(base.gram * (a.conj().T @ b).real))


def vertical_generator(base, xi):
    """Skew-symmetric ``W`` such that ``Z W`` is the vertical part of ``xi``."""
    base = _point(base)
    a = base.solve_gram_right((_lift(base, xi).conj().T @ base.z).real).T
    # a = S^{-1} Re{Z^H xi}; its antisymmetric part is the generator
    return 0.5 * (a - a.T)


def project_horizontal(base, xi):
    """Metric-orthogonal projection of ``xi`` onto the horizontal space at ``base``."""
    base = _point(base)
    v = _lift(base, xi)
    if base.shape[1] == 1:
        return HorizontalTangent(v, base)
    w = vertical_generator(base, v)
    return HorizontalTangent(v - base.z @ w, base)


def retract(base, xi, alpha=1.0):
    """``Z + alpha xi``; raises RankDeficient if the result loses rank."""
    base = _point(base)
    return FactorPoint(base.z + alpha * _lift(base, xi))


def transport(new_base, xi_old):
    """Carry a tangent vector to ``new_base`` by horizontal projection there."""
    v = xi_old.xi if isinstance(xi_old, HorizontalTangent) else np.asarray(xi_old)
    return project_horizontal(new_base, v)


def orbit_representative_shift(z, o, atol=1e-12):
    """Another representative ``Z O`` of the same class."""
    z = _point(z)
    o = np.asarray(o, dtype=float)
    k = z.shape[1]
    if o.shape != (k, k) or np.abs(o.T @ o - np.eye(k)).max() > atol:
        raise NotOrthogonal("shift must be a real orthogonal K x K matrix")
    return FactorPoint(z.z @ o, check=False)
