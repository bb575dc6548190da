"""nocollide: simulation and verification toolkit for non-collision
probabilities of planar random walks and Brownian particles among
rectangular obstacles."""

from .bounds import (
    BoundParams,
    corridor_exponent_shape,
    higher_dim_noncollision_bound,
    log_survival_floor,
    nu_T0,
    survival_floor,
)
from .dynamics import (
    BatchResult,
    RunRecord,
    Scene,
    StepControl,
    StopSpec,
    run_batch,
    run_continuous,
    run_lattice,
)
from .estimator import (
    ExponentFit,
    OracleResult,
    SurvivalEstimate,
    bound_comparison,
    ctmc_oracle,
    estimate_survival,
    fit_exponent,
    survival_curve,
    wilson_interval,
)
from .geometry import (
    Ball,
    Configuration,
    Point,
    Rect,
    Shadow,
    body_clearance,
    box_dilate,
    center_clearance,
    circumscribed,
    dist_inf_sets,
    dist_p,
    lattice_border,
    shadow,
)
from .grouping import (
    ObstacleSet,
    composition_check,
    group_fixpoint,
    group_once,
    mesoscopic_scale,
    perimeter_inequality_check,
    shadow_preservation_check,
)
from .potential import (
    BarrierDomainError,
    BarrierSpec,
    ball_exit_survival_bound,
    barrier_value,
    certify_subharmonic,
    fd_laplacian,
    log_scale_invariance_bound,
    pair_log_product,
    sample_configurations,
)
from .spectral import (
    chain_matrix,
    chain_matrix_det,
    charpoly,
    collision_indices,
    collision_matrix,
    correlation_lower_bound,
    min_collision_correlation,
    nonneg_form_min,
    spectrum_closed_form,
)

__version__ = "0.1.0"
