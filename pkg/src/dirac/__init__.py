"""Directed accumulation operators and accumulator-space transforms."""

from .errors import (
    DiracError,
    InvalidArgumentError,
    ShapeMismatchError,
    UndefinedCorrelationError,
)
from .kernels import Kernel, kernel_derivative, kernel_eval
from .tensors import (
    FeatureMap,
    GridSet,
    SamplingGrid,
    deterministic_sum,
    mesh_grid,
    read_tensor,
    write_tensor,
)
from .sampling import grid_sample, grid_sample_backward
from .accumulator import accumulate, accumulate_backward, adjoint_gap
from .rim import (
    GradientField,
    RimConfig,
    build_rim_grids,
    rim_transform,
    rim_transform_volume,
    sobel_gradients,
)
from .transforms import hough_lines, polar_resample, radon_projection
from .phantom import (
    AugmentConfig,
    LesionKind,
    LesionSpec,
    QsmPhantom,
    augment,
    dipole_kernel,
    generate_lesion,
    qsm_forward,
)
from .metrics import (
    FoldAssignment,
    MetricsReport,
    classify_scores,
    stratified_folds,
    subject_counts,
)
from .bench import (
    BenchRecord,
    generate_dataset,
    peak_feature_classifier,
    peak_feature_score,
    run_benchmark,
)

__version__ = "0.1.0"
