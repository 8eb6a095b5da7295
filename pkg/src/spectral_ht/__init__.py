"""Spectrally sparse signal recovery by Riemannian conjugate gradient descent
on Hankel-Toeplitz structured low-rank factors."""

from .errors import (
    BadIndex,
    BaseMismatch,
    ConfigError,
    DimensionMismatch,
    DuplicateFrequency,
    InputError,
    LineSearchStalled,
    NotOrthogonal,
    NotSymmetric,
    OutputExists,
    RankDeficient,
    SeparationInfeasible,
    SparsityTooLarge,
    SpectralHTError,
    ZeroCoefficient,
    ZeroReference,
)
from .harness import (
    ExperimentConfig,
    TrialResult,
    run_convergence,
    run_phase_transition,
    run_single,
    run_timing,
    solve_instance,
    trial_seeds,
)
from .manifold import (
    FactorPoint,
    HorizontalTangent,
    metric,
    orbit_representative_shift,
    project_horizontal,
    retract,
    transport,
    vertical_generator,
)
from .objective import (
    HhatRay,
    LineSearchPoly,
    ProblemData,
    eval_h,
    eval_hhat,
    eval_psi,
    euclidean_gradient,
    line_search_poly,
    pinv_norm_along_ray,
    riemannian_gradient,
)
from .signals import (
    ObservationSet,
    SpectralSignal,
    embed,
    generate_signal,
    identifiability_bounds,
    nmse,
    observe,
    random_instance,
)
from .solver import (
    SolverConfig,
    SolverTrace,
    Status,
    armijo_search,
    conjugate_direction,
    extract_signal,
    initial_step,
    initialize,
    run,
)
from .structured import (
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
from .takagi import takagi

__version__ = "0.1.0"
