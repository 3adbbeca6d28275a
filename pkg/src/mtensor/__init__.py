"""Third-order tensor algebra under the M-product with two-step iterative
solvers for ``A *_M X *_M B = C``, regularized least squares and a
cross-channel image deblurring model."""

from .core import (
    DimensionError,
    HatTensor,
    SingularSliceError,
    SingularTransformError,
    Structure,
    Tensor3,
    TensorError,
    Transform,
    block2x2,
    conj_transpose,
    diag_part,
    face_product,
    frobenius_norm,
    hconcat,
    identity_tensor,
    inverse,
    is_nonnegative,
    m_chain,
    m_power,
    m_product,
    mode3_product,
    mp_inverse,
    spectral_radius,
    strict_lower_part,
    strict_upper_part,
    structural_predicates,
    tubal_norm,
    tubal_rank,
    vconcat,
    zeros_like,
)
from .deblur import (
    BlurModel,
    blur_matrix,
    build_blur_pair,
    psnr,
    reconstruct,
    synthesize_observation,
    synthetic_image,
    tune_regularization,
)
from .lstsq import (
    InconsistentSystemError,
    RegularizationParams,
    general_solution,
    is_consistent,
    min_norm_lstsq,
    sylvester_embed,
    sylvester_residual,
    sylvester_solve,
    tikhonov_solve,
)
from .solver import (
    PRESETS,
    SolverConfig,
    SolveReport,
    aor_tspi_solve,
    direct_solve,
    iteration_radii,
    preset_solve,
    ptspi_solve,
    residual,
    two_step_solve,
)
from .splitting import (
    AorParams,
    Splitting,
    SplittingClass,
    ZeroDiagonalError,
    alpha_bound,
    aor_splitting,
    classify,
    convergence_radius,
    gauss_seidel_splitting,
    iteration_tensor,
    jacobi_splitting,
    nonnegative_splitting_check,
    splitting_from,
)

__version__ = "0.1.0"
