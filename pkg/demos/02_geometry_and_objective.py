"""Walk through the quotient geometry and check the gradient against finite differences."""

import numpy as np

from spectral_ht import (
    FactorPoint,
    ObservationSet,
    ProblemData,
    eval_hhat,
    initialize,
    line_search_poly,
    metric,
    observe,
    project_horizontal,
    random_instance,
    riemannian_gradient,
)

sig = random_instance(40, 3, rng_seed=3)
omega = ObservationSet.random(40, 25, rng_seed=3)
data = ProblemData.build(omega, observe(sig, omega), 3)
z = initialize(data, 3)
print(f"factor shape {z.shape}, objective at the spectral initializer {eval_hhat(data, z):.4e}")

# Right-multiplying by an orthogonal matrix does not change Z Z^T, so the
# objective is constant along that orbit.
q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((3, 3)))
print("objective on the orbit:", eval_hhat(data, FactorPoint(z.z @ q)))

rng = np.random.default_rng(1)
raw = rng.standard_normal(z.shape) + 1j * rng.standard_normal(z.shape)
xi = project_horizontal(z, raw)
print(f"horizontal part keeps {metric(z, xi, xi) / metric(z, raw, raw):.3f} of the squared norm")

g = riemannian_gradient(data, z)
t = 1e-6
fd = (eval_hhat(data, z.z + t * xi.xi) - eval_hhat(data, z.z - t * xi.xi)) / (2 * t)
print(f"directional derivative: gradient {metric(z, g, xi):.8e}, finite difference {fd:.8e}")

# Along a ray the data and structure terms are an exact quartic in the step size.
poly = line_search_poly(data, z, -g.xi)
print("quartic coefficients along -grad:", np.round(poly.coeffs, 6))
