"""Riemannian conjugate gradient descent for Hankel-Toeplitz factor recovery.

Each iteration computes the Riemannian gradient, forms a Polak-Ribiere
conjugate direction with a descent safeguard, picks an initial step from the
smallest positive stationary point of the exact quartic ``h`` along the ray,
backtracks until the Armijo condition on ``hhat`` holds and retracts.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.sparse.linalg import LinearOperator, svds

from .errors import DimensionMismatch, LineSearchStalled, RankDeficient, SparsityTooLarge
from .manifold import FactorPoint, HorizontalTangent, _lift, metric, retract, transport
from .objective import DEFAULT_LAMBDA, HhatRay, eval_h, eval_hhat, riemannian_gradient
from .signals import nmse
from .structured import fast_hankel_gram, gram_weights, hankel_from_vector, hankel_matvec
from .takagi import takagi

DENSE_INIT_MAX_P = 512
ROOT_IMAG_RTOL = 1e-10
TRACE_COLUMNS = (
    "iter", "h", "hhat", "grad_norm_sq", "alpha", "beta",
    "backtracks", "safeguard", "nmse", "wall_ms",
)


class Status(str, enum.Enum):
    GRAD_TOLERANCE_MET = "GradToleranceMet"
    MAX_ITERATIONS = "MaxIterations"
    LINE_SEARCH_STALLED = "LineSearchStalled"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls.

    ``relative_safeguard`` scales the safeguard threshold by ``g(grad, grad)``.
    """

    max_iter: int = 3000
    grad_tol: float = 1e-6
    safeguard_c: float = 1e-8
    armijo_C: float = 1e-5
    lam: float = DEFAULT_LAMBDA
    mu_override: float | None = None
    max_backtracks: int = 60
    seed: int = 0
    relative_safeguard: bool = False

    def __post_init__(self):
        if not 0 < self.armijo_C < 1:
            raise ValueError(f"armijo_C must lie in (0, 1), got {self.armijo_C}")
        if self.safeguard_c <= 0:
            raise ValueError("safeguard_c must be positive")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.max_iter < 0 or self.max_backtracks < 0:
            raise ValueError("iteration limits must be nonnegative")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown solver options: {sorted(unknown)}")
        return cls(**d)


@dataclass
class IterationRecord:
    """State at the start of iteration ``iter`` and the step taken from it.

    ``h`` and ``hhat`` of record ``t > 0`` are the values seen by the line
    search at the accepted step of record ``t - 1``.  The step fields are
    ``nan``/``-1`` on the final record, where no step was taken.
    """

    iter: int
    h: float
    hhat: float
    grad_norm_sq: float
    alpha: float = math.nan
    beta: float = math.nan
    backtracks: int = -1
    safeguard: bool = False
    nmse: float | None = None
    wall_ms: float = 0.0
    descent: float = math.nan
    sigma_min: float = math.nan
    sigma_max: float = math.nan


@dataclass
class SolverTrace:
    records: list = field(default_factory=list)
    status: Status | None = None
    has_truth: bool = False

    def __len__(self):
        return len(self.records)

    @property
    def iterations(self):
        """Number of steps taken."""
        return max(len(self.records) - 1, 0)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def columns(self):
        return TRACE_COLUMNS if self.has_truth else tuple(c for c in TRACE_COLUMNS if c != "nmse")

    def rows(self):
        for r in self.records:
            d = asdict(r)
            d["safeguard"] = int(d["safeguard"])
            yield [d[c] for c in self.columns]

    def to_csv(self, path=None):
        """Write the trace as CSV to ``path``, or return the text when ``path`` is None."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows():
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
        text = buf.getvalue()
        if path is None:
            return text
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        return None


def extract_signal(z, n):
    """Signal estimate ``D^{-2} H*(Z Z^T)``, truncated to ``n`` samples."""
    zz = z.z if isinstance(z, FactorPoint) else np.asarray(z, dtype=complex)
    if zz.ndim == 1:
        zz = zz[:, None]
    p = zz.shape[0]
    if not 1 <= n <= 2 * p - 1:
        raise DimensionMismatch(f"cannot extract {n} samples from a factor with p = {p}")
    return (fast_hankel_gram(zz, zz) / gram_weights(p))[:n]


def _top_left_singular_vectors(w, p, k, seed):
    if p <= DENSE_INIT_MAX_P:
        v, _, _ = np.linalg.svd(hankel_from_vector(w))
        return v[:, :k]
    # H(w) is complex symmetric, so H^H x = conj(H conj(x))
    op = LinearOperator(
        (p, p),
        matvec=lambda x: hankel_matvec(w, x),
        rmatvec=lambda x: hankel_matvec(w, x.conj()).conj(),
        dtype=complex,
    )
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(p) + 1j * rng.standard_normal(p)
    u, s, _ = svds(op, k=k, v0=v0, solver="arpack")
    return u[:, np.argsort(-s)]


def initialize(data, k, seed=0):
    """Spectral starting point from the scaled zero-filled Hankel matrix.

    The best rank-K approximation ``V C V^T`` with ``C = V^H A conj(V)`` is
    Takagi-factorized through the small K x K block, giving
    ``Z0 = V Q diag(s)^{1/2}``.
    """
    p = data.p
    if k >= p:
        raise SparsityTooLarge(f"K = {k} must be smaller than p = {p}")
    w = np.zeros(data.dims.length, dtype=complex)
    w[data.positions] = data.observed
    w *= data.omega.m / data.n
    vk = _top_left_singular_vectors(w, p, k, seed)
    c = vk.conj().T @ hankel_matvec(w, vk.conj())
    q, s = takagi(0.5 * (c + c.T))
    z = (vk @ q) * np.sqrt(s)
    sv = np.linalg.svd(z, compute_uv=False)
    if not np.all(np.isfinite(sv)) or sv[-1] <= 1e-12 * max(sv[0], 1.0):
        rng = np.random.default_rng(seed)
        scale = 1e-12 * max(1.0, float(np.linalg.norm(w)))
        z = z + scale * (rng.standard_normal(z.shape) + 1j * rng.standard_normal(z.shape))
    return FactorPoint(z)


def conjugate_direction(grad, base, prev_grad=None, prev_grad_sqnorm=None, prev_dir=None,
                        c=1e-8, relative=False):
    """Polak-Ribiere direction at ``base`` with the descent safeguard.

    Previous tangents are carried over by horizontal projection at ``base``,
    and the safeguard inner product is taken at ``base`` too.

    Returns
    -------
    direction : HorizontalTangent
    beta : float
    safeguard_used : bool
    """
    neg = HorizontalTangent(-_lift(base, grad), base)
    if prev_grad is None or prev_dir is None:
        return neg, 0.0, False
    g = _lift(base, grad)
    if prev_grad_sqnorm is None:
        prev_grad_sqnorm = metric(prev_grad.base, prev_grad, prev_grad)
    tg = transport(base, prev_grad).xi
    beta = metric(base, g, g - tg) / prev_grad_sqnorm
    eta = HorizontalTangent(-g + beta * transport(base, prev_dir).xi, base)
    thr = c * metric(base, g, g) if relative else c
    if metric(base, eta, neg) > thr:
        return eta, float(beta), False
    return neg, float(beta), True


def initial_step(poly, fallback):
    """Smallest positive real root of ``phi'``, or ``fallback`` when none exists."""
    c = poly.coeffs
    roots = np.roots([4 * c[4], 3 * c[3], 2 * c[2], c[1]])
    roots = roots[np.abs(roots.imag) <= ROOT_IMAG_RTOL * (1 + np.abs(roots.real))].real
    roots = roots[roots > 0]
    return float(roots.min()) if roots.size else float(fallback)


def armijo_search(data, base, xi, grad, alpha0, cfg, ray=None):
    """Halve ``alpha0`` until ``hhat(Z) - hhat(Z + a xi) >= -C a g(grad, xi)``.

    Returns ``(alpha, q)`` with ``alpha = alpha0 / 2**q``.
    """
    slope = metric(base, grad, xi)
    if not slope < 0:
        raise AssertionError(f"xi is not a descent direction: g(grad, xi) = {slope}")
    ray = HhatRay(data, base, xi) if ray is None else ray
    h0 = ray(0.0)
    for q in range(cfg.max_backtracks + 1):
        alpha = alpha0 / 2.0**q
        if h0 - ray(alpha) >= -cfg.armijo_C * alpha * slope:
            return alpha, q
    raise LineSearchStalled(f"no Armijo step after {cfg.max_backtracks} halvings of {alpha0}")


def _sigma(z):
    s = z.singular_values()
    return float(s[-1]), float(s[0])


def run(data, k, cfg=None, truth=None, z0=None):
    """Run the solver.

    Parameters
    ----------
    data : ProblemData
    k : int
        Number of spectral components.
    cfg : SolverConfig, optional
        Its ``lam`` and ``mu_override`` take precedence over the values in ``data``.
    truth : array_like, optional
        Full length-N signal; enables the per-iteration NMSE column.
    z0 : array_like or FactorPoint, optional
        Starting factor, overriding the spectral initialization.

    Returns
    -------
    (FactorPoint, SolverTrace)
        The final iterate (the best one seen if the line search stalls) and
        the trace.
    """
    cfg = SolverConfig() if cfg is None else cfg
    if k >= data.p:
        raise SparsityTooLarge(f"K = {k} must be smaller than p = {data.p}")
    if truth is not None:
        truth = np.asarray(truth, dtype=complex)
        if truth.shape != (data.n,):
            raise DimensionMismatch(f"truth must have {data.n} samples, got {truth.shape}")
    t_start = time.perf_counter()
    mu = data.mu if cfg.mu_override is None else float(cfg.mu_override)
    if (mu, cfg.lam) != (data.mu, data.lam):
        data = replace(data, mu=mu, lam=float(cfg.lam))

    z = initialize(data, k, cfg.seed) if z0 is None else (
        z0 if isinstance(z0, FactorPoint) else FactorPoint(z0))
    if z.shape != (data.p, k):
        raise DimensionMismatch(f"starting factor must be {data.p} x {k}, got {z.shape}")

    trace = SolverTrace(has_truth=truth is not None)
    h_cur = eval_h(data, z)
    hhat_cur = eval_hhat(data, z)
    prev_grad = prev_dir = None
    prev_gg = None
    alpha_prev = 1.0

    for it in range(cfg.max_iter + 1):
        grad = riemannian_gradient(data, z)
        gg = metric(z, grad, grad)
        smin, smax = _sigma(z)
        rec = IterationRecord(it, h_cur, hhat_cur, gg, sigma_min=smin, sigma_max=smax)
        if truth is not None:
            rec.nmse = nmse(extract_signal(z, data.n), truth)
        trace.records.append(rec)

        if gg < cfg.grad_tol:
            trace.status = Status.GRAD_TOLERANCE_MET
            break
        if it == cfg.max_iter:
            trace.status = Status.MAX_ITERATIONS
            break

        direction, beta, used = conjugate_direction(
            grad, z, prev_grad, prev_gg, prev_dir, cfg.safeguard_c, cfg.relative_safeguard)
        rec.beta, rec.safeguard = beta, used
        rec.descent = metric(z, direction, -grad)
        ray = HhatRay(data, z, direction)
        alpha0 = initial_step(ray.poly, alpha_prev)
        try:
            alpha, q = armijo_search(data, z, direction, grad, alpha0, cfg, ray=ray)
            z_new = retract(z, direction, alpha)
        except (LineSearchStalled, RankDeficient):
            trace.status = Status.LINE_SEARCH_STALLED
            rec.wall_ms = 1e3 * (time.perf_counter() - t_start)
            break
        rec.alpha, rec.backtracks = alpha, q
        rec.wall_ms = 1e3 * (time.perf_counter() - t_start)

        h_cur, hhat_cur = ray.h(alpha), ray(alpha)
        prev_grad, prev_gg, prev_dir = grad, gg, direction
        alpha_prev = alpha
        z = z_new

    trace.records[-1].wall_ms = 1e3 * (time.perf_counter() - t_start)
    return z, trace
