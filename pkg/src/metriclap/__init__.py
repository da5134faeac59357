"""Graph Laplacians, eigenmap embeddings and induced-metric audits for
pairwise metric oracles on sampled manifolds."""

from .oracles import (
    MetricOracle,
    canonical_angle,
    chordal_distance,
    chordal_oracle,
    cubic_embedding_distance,
    cubic_oracle,
    disk_intersection_area,
    geodesic_distance_circle,
    geodesic_oracle,
    make_oracle,
    rotating_ball_l1,
    rotating_ball_l2,
    ball_l1_oracle,
    ball_l2_oracle,
    translation_oracle,
    dilation_oracle,
    wasserstein_dilation,
    wasserstein_translation,
    weighted_l1_circle,
    weighted_l1_oracle,
)
from .raster import RasterImage, image_lp_distance, rasterize_ball
from .laplacian import (
    KernelGraph,
    ScheduleParams,
    build_weight_matrix,
    discrete_laplacian_apply,
    epsilon_schedule,
    gaussian_kernel,
    laplace_kernel,
    normalized_laplacian,
    scaling_constant,
    unnormalized_laplacian,
)
from .spectral import (
    SpectralResult,
    angular_fidelity,
    eigendecompose_normalized,
    eigenmap_embedding,
)
from .geometry import (
    AssumptionAudit,
    BiasBoundReport,
    BilinearForm,
    assumption2_audit,
    beta_separation,
    bias_bounds,
    fourth_derivative_bound,
    induced_metric_hessian,
    limiting_operator_weighted_l1,
    nondegeneracy_check,
    quadrature_A_G,
    second_order_limit,
    trace_integral,
)
from .experiments import ExperimentConfig, ConvergenceRecord

__version__ = "0.1.0"
