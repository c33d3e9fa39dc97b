"""Pseudospectral laboratory for the one-dimensional coupled
Dirac / Klein-Gordon system in its diagonalized half-wave form."""

__version__ = "0.1.0"

from .algebra import (
    ALPHA,
    BETA,
    SIGN_PAIRS,
    SignPair,
    gamma,
    gamma_table,
    projection,
    verify_algebra,
)
from .bourgain import (
    SpaceTimeField,
    SpaceTimeGrid,
    XsbParams,
    check_algebraic_inequality,
    gronwall_monitor,
    inequality_scan,
    probe_estimate_star2,
    probe_estimate_star3,
    product_constant,
    product_estimate_check,
    xsb_norm,
)
from .evolve import (
    NumericalBlowup,
    PicardConfig,
    SchemeConfig,
    Trajectory,
    free_flow,
    picard_solve,
    reference_solve,
    solve,
    step,
)
from .grid import (
    Field,
    GridError,
    Multiplier,
    SpectralGrid,
    apply_multiplier,
    l2_norm,
    l2_norm_physical,
    make_grid,
    sobolev_norm,
)
from .rhs import (
    RhsBundle,
    dirac_rhs,
    full_rhs,
    kg_rhs,
    nullform,
    nullform_projected,
    nullform_projected_spectral,
)
from .state import (
    DiagonalState,
    Params,
    PhysicalState,
    charge,
    load_state,
    random_physical_state,
    random_sobolev_field,
    save_state,
    to_diagonal,
    to_physical,
)
