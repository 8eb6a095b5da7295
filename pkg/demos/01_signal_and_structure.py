"""Build a spectrally sparse signal, observe part of it, and inspect its Hankel lift.

The lifted Hankel matrix has rank equal to the number of spectral components,
which is what makes completion from a subset of samples possible.
"""

import numpy as np

from spectral_ht import (
    ObservationSet,
    StructuredDims,
    fast_hankel_gram,
    gram_weights,
    hankel_adjoint,
    hankel_from_vector,
    identifiability_bounds,
    observe,
    random_instance,
)

n, k = 64, 4
sig = random_instance(n, k, min_separation=1.0 / n, rng_seed=1)
print("frequencies:", np.round(sig.frequencies, 4))

omega = ObservationSet.random(n, 32, rng_seed=1)
y = observe(sig, omega)
print(f"observed {omega.m} of {n} samples; K must stay below {identifiability_bounds(omega.m)[1]:.1f}")

dims = StructuredDims.for_signal(n, k)
x = np.zeros(2 * dims.p - 1, dtype=complex)
x[:n] = sig.samples
h = hankel_from_vector(x)
s = np.linalg.svd(h, compute_uv=False)
print(f"Hankel lift is {h.shape[0]}x{h.shape[1]}; leading singular values:", np.round(s[: k + 2], 6))

# The adjoint of the lift weights every anti-diagonal by its length.
assert np.allclose(hankel_adjoint(h), gram_weights(dims.p) * x)

# For a low-rank factor, the anti-diagonal sums of Z Z^T come from FFTs
# without forming the p x p product.
rng = np.random.default_rng(0)
z = rng.standard_normal((dims.p, k)) + 1j * rng.standard_normal((dims.p, k))
fast = fast_hankel_gram(z, z)
dense = hankel_adjoint(z @ z.T)
print("FFT anti-diagonal sums match dense:", np.allclose(fast, dense))
