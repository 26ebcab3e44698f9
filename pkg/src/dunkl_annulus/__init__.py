"""Potential theory for reflection-weighted Laplacians on an annulus.

Evaluates the weighted Poisson kernels of the annulus, solves the boundary
Dirichlet problem, computes the fundamental-solution and Green kernels by
two independent routes, integrates Green potentials with controlled
singularity excision, checks the boundary-representation identity, and
solves a semilinear boundary problem by damped fixed-point iteration.
Everything is verified against the classical (reflection-free) case and
cross-route consistency.
"""

from ._fields import GridField, ScalarField, constant_field, eval_batch, rotated_field
from .errors import ConfigError, HyperplaneProximityError, TruncationError
from .intertwining import MuMeasure, mu_measure, vk_apply
from .kernels import (
    AnnulusGeometry,
    BoundaryData,
    DirichletSolution,
    SeriesConfig,
    coeff_a,
    coeff_b,
    dirichlet_solve,
    pk1,
    pk2,
    pk2_inner,
    poisson_ball,
    poisson_ball_table,
)
from .newton_green import (
    GreenEvaluator,
    GreenPotentialResult,
    ball_mass,
    eta,
    eta_shell_bound,
    green,
    green_cross,
    green_potential,
    kelvin,
    newton,
    newton_cross,
    newton_series,
)
from .operators import (
    LaplacianStencil,
    ball_mass_quadrature,
    dunkl_derivative,
    dunkl_laplacian,
    dunkl_laplacian_batch,
    harmonic_kernel,
    volume_mean,
)
from .quadrature import QuadratureRule, annulus_rule, ball_rule, mu_rule, sphere_rule
from .rootsystem import (
    DunklConstants,
    RootSystemSpec,
    constants,
    group_elements,
    orbit_distance,
    orbit_points,
    sign_group,
    trivial,
    weight,
)
from .solvers import (
    ComparisonReport,
    PoissonJensenReport,
    RieszMeasure,
    SemilinearProblem,
    SemilinearResult,
    comparison_check,
    poisson_jensen_check,
    radial_bump,
    semilinear_solve,
)
from .special import (
    GegenbauerParam,
    dim_harmonic,
    gegenbauer,
    gegenbauer_sequence,
    pochhammer,
    zonal_bound,
)
from .zonal import zonal, zonal_field, zonal_pair, zonal_stream, zonal_table

__version__ = "0.1.0"
