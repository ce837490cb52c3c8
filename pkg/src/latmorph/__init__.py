"""latmorph: lattice unit-cell latent spaces and transition-region evaluation.

Train geometry-only or hybrid (geometry + stiffness) variational
autoencoders on 2D lattice unit cells, generate multi-lattice transition
regions by latent interpolation, and score them with geometric-smoothness
and stiffness-continuity metrics plus OLS trend analysis.
"""

from .analysis import (
    RegressionDesign,
    RegressionResult,
    SingularDesignError,
    ols_fit,
    pca_project,
    regression_csv,
    significance_table,
)
from .dataset import (
    CellRecord,
    Dataset,
    DatasetFormatError,
    SplitSpec,
    generate_synthetic_dataset,
    load_dataset,
    save_dataset,
    split_dataset,
)
from .homogenize import (
    DEFAULT_MATERIAL,
    HomogenizationError,
    MaterialModel,
    StiffnessStats,
    homogenize_cell,
    homogenize_grid,
    normalize_stiffness,
    plane_stress_matrix,
    stiffness_stats,
    validate_stiffness_tensor,
)
from .latent import (
    ClusteringError,
    LatentStats,
    SweepRecord,
    TransitionRegion,
    TransitionSpec,
    cluster_latent,
    decode_transition,
    encode_cell,
    interpolate_linear,
    latent_stats,
    mesh_interpolate,
    parse_sweep_csv,
    run_sweep,
    sweep_endpoints,
    sweep_records_to_csv,
)
from .metrics import (
    ContinuityResult,
    GradientKernel,
    SmoothnessResult,
    geometric_smoothness,
    gradient_volumes,
    stiffness_continuity,
    transition_stiffness,
)
from .vae import (
    GeometryVAE,
    HybridVAE,
    ModelCheckpoint,
    TrainConfig,
    TrainingDivergedError,
    build_model,
    loss_terms,
    reconstruction_report,
    train,
)

__version__ = "0.1.0"
