"""machlab: pseudo-spectral laboratory for the low-Mach penalized Euler system."""

from .axisym import (
    spherical_test_source,
    AxisymRecipe,
    cyl_components,
    make_ill_prepared,
    make_velocity,
    riesz_identity_check,
    zeta_analytic,
)
from .checkpoint import read_checkpoint, write_checkpoint
from .config import RecipeConfig, RunConfig, SweepConfig, load_config
from .diagnostics import (
    Rearrangement,
    energy,
    energy_ineq_check,
    geometry_residuals,
    lipschitz_monitor,
    lorentz_norm,
    zeta,
)
from .field import SpectralField, VecField, l2_inner
from .grid import Grid, GridMismatchError
from .harness import compare_incompressible, fit_power_law, sweep
from .lp import (
    BesovSpec,
    DyadicFilterBank,
    PsiConstruction,
    bernstein_report,
    besov_norm,
    bony,
    commutator,
    commutator_report,
    construct_psi,
    dilate_check,
    get_filter_bank,
)
from .operators import (
    curl,
    dealiased_product,
    div,
    grad,
    helmholtz,
    inv_laplacian,
    laplacian,
    leray,
    padded_product,
    riesz,
)
from .runner import acoustic_oracle_l1, initial_state, run
from .runner_support import ReferenceSeries
from .solver import (
    FilteredState,
    acoustic_propagate,
    nonlinear_rhs,
    step_compressible,
    step_incompressible,
)
from .state import PreconditionError, State, StepControl

__version__ = "0.1.0"
