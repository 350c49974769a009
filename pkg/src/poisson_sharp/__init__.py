"""Sharp peak bounds for the Dirichlet Poisson problem on grid domains."""

from .grid import (
    DegenerateDomainError,
    DisconnectedDomainError,
    GridDomain,
    ScalarField,
    cellset_centroid,
    cellset_circularity,
    equivalent_ball_radius,
    make_domain,
    parse_shape,
    rank_ball_domain,
    read_mask_file,
    unit_ball_volume,
    write_mask_file,
)
from .solver import (
    GreenColumn,
    PoissonSolution,
    SolveError,
    apply_laplacian,
    green_column,
    solve_poisson,
    torsion_function,
)
from .bathtub import (
    BathtubSet,
    GreenCache,
    OptimizerOptions,
    SigmaCurve,
    SigmaPoint,
    calibrate_bathtub,
    optimize_extremal,
    sigma_curve,
    stationarity_check,
)
from .bounds import (
    BallModulusParams,
    BoundReport,
    ball_constants,
    ball_sigma_evaluator,
    peak_bound_l1_linf,
    bound_shifted,
    bound_sign_split,
    optimizer_sigma_evaluator,
    printed_sigma_ball,
    radial_sigma_ball,
    verify_modulus_bound,
)
from .rearrange import (
    RadialProfile,
    comparison_ball,
    green_rearrangement_check,
    radial_profile,
    rearrange,
    talenti_check,
)
from .spectral import EigenPair, eigen_bound_check, eigen_raw_bound_check, eigenpairs
from .families import (
    Lcg64,
    clipped_bump,
    indicator_blob,
    nonnegative_field,
    sign_changing_field,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
