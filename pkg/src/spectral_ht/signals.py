"""Spectrally sparse signals, observation sets and error metrics.

Indexing follows the mathematical convention: sample ``n`` runs over
``1..N`` and an :class:`ObservationSet` stores 1-based indices.  Arrays
holding samples are ordinary 0-based numpy vectors, so sample ``n`` lives at
array position ``n - 1``; :attr:`ObservationSet.positions` gives that map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadIndex,
    DimensionMismatch,
    DuplicateFrequency,
    SeparationInfeasible,
    ZeroCoefficient,
    ZeroReference,
)

MAX_REJECTION_ATTEMPTS = 10_000


def _readonly(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


def circular_distance(f1, f2):
    """Wrap-around distance between frequencies on the unit torus [0, 1)."""
    d = np.abs(np.asarray(f1) - np.asarray(f2)) % 1.0
    return np.minimum(d, 1.0 - d)


def min_circular_separation(freqs):
    """Smallest pairwise wrap-around gap; ``inf`` for fewer than two frequencies."""
    f = np.sort(np.mod(np.asarray(freqs, dtype=float), 1.0))
    if f.size < 2:
        return np.inf
    gaps = np.diff(np.concatenate([f, [f[0] + 1.0]]))
    return float(gaps.min())


def synthesize(freqs, coeffs, n):
    """Evaluate ``sum_k s_k exp(j 2 pi (n-1) f_k)`` for ``n = 1..N``."""
    freqs = np.asarray(freqs, dtype=float)
    coeffs = np.asarray(coeffs, dtype=complex)
    t = np.arange(n)[:, None]
    return np.exp(2j * np.pi * t * freqs[None, :]) @ coeffs


@dataclass(frozen=True)
class SpectralSignal:
    """Ground truth parameters of a K-sparse spectral signal and its samples.

    ``samples[n-1]`` holds y_n for the 1-based sample index n.
    """

    n_samples: int
    frequencies: np.ndarray
    coefficients: np.ndarray
    samples: np.ndarray = field(repr=False)
    seed: int | None = None

    @property
    def k(self):
        return len(self.frequencies)

    def to_json(self):
        return json.dumps(
            {
                "n": int(self.n_samples),
                "freqs": [float(f) for f in self.frequencies],
                "coeffs": [[float(c.real), float(c.imag)] for c in self.coefficients],
                "seed": self.seed,
            }
        )

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        coeffs = [complex(re, im) for re, im in obj["coeffs"]]
        sig = generate_signal(obj["freqs"], coeffs, obj["n"])
        return cls(sig.n_samples, sig.frequencies, sig.coefficients, sig.samples, obj.get("seed"))


def generate_signal(freqs, coeffs, n, seed=None):
    """Build a :class:`SpectralSignal` from frequencies and coefficients.

    Raises
    ------
    DuplicateFrequency
        If two frequencies coincide modulo 1.
    ZeroCoefficient
        If any coefficient is exactly zero.
    """
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    if freqs.ndim != 1 or freqs.shape != coeffs.shape or freqs.size == 0:
        raise DimensionMismatch("freqs and coeffs must be 1-D sequences of equal length K >= 1")
    if int(n) < 1:
        raise DimensionMismatch(f"n must be positive, got {n}")
    if freqs.size > 1 and min_circular_separation(freqs) == 0.0:
        raise DuplicateFrequency("frequencies must be pairwise distinct modulo 1")
    if np.any(coeffs == 0):
        raise ZeroCoefficient("all coefficients must be nonzero")
    samples = synthesize(freqs, coeffs, int(n))
    return SpectralSignal(int(n), _readonly(freqs), _readonly(coeffs), _readonly(samples), seed)


def random_frequencies(k, min_separation, rng):
    """Rejection-sample ``k`` uniform frequencies with a wrap-around gap floor."""
    if min_separation * k >= 1.0:
        raise SeparationInfeasible(
            f"cannot place {k} frequencies with separation {min_separation} on the unit circle"
        )
    for _ in range(MAX_REJECTION_ATTEMPTS):
        f = rng.uniform(0.0, 1.0, size=k)
        sep = min_circular_separation(f)
        if sep >= min_separation and sep > 0.0:
            return f
    raise SeparationInfeasible(
        f"no placement of {k} frequencies with separation {min_separation} "
        f"after {MAX_REJECTION_ATTEMPTS} attempts"
    )


def random_coefficients(k, rng):
    """Amplitudes ``1 + |w|`` with ``w`` standard normal, phases uniform on [0, 2 pi)."""
    amp = 1.0 + np.abs(rng.standard_normal(k))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=k)
    return amp * np.exp(1j * phase)


def random_instance(n, k, min_separation=0.0, rng_seed=0, freqs=None):
    """Draw a random K-sparse signal of length ``n``.

    If ``freqs`` is given only the coefficients are random.
    """
    if k < 1:
        raise DimensionMismatch(f"k must be >= 1, got {k}")
    rng = np.random.default_rng(rng_seed)
    if freqs is None:
        freqs = random_frequencies(k, min_separation, rng)
    elif len(freqs) != k:
        raise DimensionMismatch("len(freqs) must equal k")
    coeffs = random_coefficients(k, rng)
    return generate_signal(freqs, coeffs, n, seed=rng_seed)


@dataclass(frozen=True)
class ObservationSet:
    """Strictly increasing 1-based sample indices Omega with ambient length n."""

    indices: np.ndarray
    n: int

    def __post_init__(self):
        idx = np.asarray(self.indices)
        if idx.ndim != 1 or idx.size == 0:
            raise BadIndex("observation set must be a nonempty 1-D index sequence")
        if not np.issubdtype(idx.dtype, np.integer):
            if not np.all(np.equal(np.mod(idx, 1), 0)):
                raise BadIndex("observation indices must be integers")
            idx = idx.astype(np.int64)
        if idx.min() < 1 or idx.max() > self.n:
            raise BadIndex(f"observation indices must lie in 1..{self.n}")
        if np.any(np.diff(idx) <= 0):
            raise BadIndex("observation indices must be strictly increasing")
        object.__setattr__(self, "indices", _readonly(idx.astype(np.int64)))

    @property
    def m(self):
        return int(self.indices.size)

    @property
    def positions(self):
        """0-based array positions of the observed samples."""
        return self.indices - 1

    @classmethod
    def full(cls, n):
        return cls(np.arange(1, n + 1), n)

    @classmethod
    def random(cls, n, m, rng_seed=0):
        """Uniform sampling of ``m`` indices without replacement from ``1..n``."""
        if not 1 <= m <= n:
            raise BadIndex(f"need 1 <= m <= n, got m={m}, n={n}")
        rng = np.random.default_rng(rng_seed)
        return cls(np.sort(rng.choice(n, size=m, replace=False)) + 1, n)


def observe(sig, omega):
    """Restrict samples to Omega (the operator P_Omega)."""
    samples = sig.samples if isinstance(sig, SpectralSignal) else np.asarray(sig)
    if samples.shape[0] != omega.n:
        raise BadIndex(f"observation set built for n={omega.n}, signal has {samples.shape[0]}")
    return samples[omega.positions]


def embed(values, omega, n=None):
    """Adjoint of :func:`observe`: zero-fill the unobserved samples."""
    n = omega.n if n is None else n
    values = np.asarray(values)
    if values.shape[0] != omega.m:
        raise DimensionMismatch(f"expected {omega.m} observed values, got {values.shape[0]}")
    if omega.indices.max() > n:
        raise BadIndex(f"observation index exceeds length {n}")
    out = np.zeros(n, dtype=np.result_type(values, complex))
    out[omega.positions] = values
    return out


def nmse(estimate, truth):
    """Normalized squared error ``||estimate - truth||^2 / ||truth||^2``."""
    estimate = np.asarray(estimate)
    truth = np.asarray(truth)
    if estimate.shape != truth.shape:
        raise DimensionMismatch(f"shape mismatch {estimate.shape} vs {truth.shape}")
    ref = np.vdot(truth, truth).real
    if ref == 0:
        raise ZeroReference("reference signal is identically zero")
    diff = estimate - truth
    return float(np.vdot(diff, diff).real / ref)


def identifiability_bounds(m):
    """Exclusive upper bounds on K for unique identifiability from ``m`` samples.

    Returns ``((m + 1) / 2, 2 m / 3)``: the deterministic bound and the almost
    sure bound.
    """
    if m < 1:
        raise DimensionMismatch(f"m must be >= 1, got {m}")
    return (m + 1) / 2, 2 * m / 3
