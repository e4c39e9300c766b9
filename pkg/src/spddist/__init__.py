"""Riemannian distances on SPD matrices with Mahalanobis-weighted ground
costs, randomized spectral estimation, diffusion-operator pipelines, and a
reproducible tori benchmark.
"""

from . import errors
from ._kernels import NUMBA_ENABLED
from .core import (
    ExtendedOperator,
    MetricWeight,
    SpdMatrix,
    Spectrum,
    extended_mahalanobis_norm,
    mahalanobis_norm,
    orthogonal_polar_factor,
    spd_log,
    spd_power,
    spd_sqrt,
    sym_eig,
)
from .geodata import (
    DiffusionOperator,
    PointCloud,
    TorusParams,
    diffusion_operator,
    median_bandwidth,
    sample_torus,
    scale_minor_radius,
    surface_residual,
)
from .learn import (
    LabeledSpectrum,
    LearnConfig,
    WeightParams,
    learn_weights,
    separation_loss,
    separation_loss_grad,
)
from .metrics import (
    DistanceResult,
    OmegaConstraintSet,
    RobustGbwSolution,
    alpha_procrustes_closed,
    alpha_procrustes_numeric,
    bures_wasserstein,
    gaussian_w2_generalized,
    gbw_objective,
    generalized_bw,
    generalized_log_euclidean,
    generalized_log_hs,
    gles_distance,
    project_to_omega_set,
    robust_gbw,
    robust_gbw_gradient,
)
from .spectral import (
    LowRankPsd,
    SketchConfig,
    eigenvalue_error_bound,
    gles_error_bound,
    nystrom_fixed_rank,
    top_k_spectrum,
)

__version__ = "0.1.0"
