"""toricdist: eigenfunction norms and value distributions on toric phase spaces.

Given a Delzant polytope with positive weights on its lattice points, the
package computes exact norms and pointwise values of the L^2-normalized
monomial eigenfunctions of the quantized torus action, their closed-form
peak asymptotics, and the three scaling regimes of their distribution
functions, with deterministic quadrature throughout.
"""

from .backend import BACKEND, available_backends
from .chart_geometry import (
    ChartPeakData,
    ChartPoint,
    chart_log_K,
    chart_log_weights,
    chart_peak,
    face_character_and_moment,
    invert_face_moment,
    L_density,
    s_and_Psi,
    vertex_peak,
)
from .distribution import (
    DistributionCurve,
    default_tgrid,
    distribution_exact,
    exp_rescaled_limit,
    limit_density,
    limit_density_moment,
    moment_check,
    rescaled_distribution,
    rescaled_limit,
    unrescaled_asymptotic,
)
from .errors import (
    MarginTooSmall,
    NoConvergence,
    NotAVertex,
    NotDelzant,
    PointNotInterior,
    PointOutsidePolytope,
    RegionTouchesBoundary,
    ToricDistError,
    VertexNotOnFace,
)
from .norms import (
    MonomialContext,
    MonomialIndex,
    NormReport,
    eigenfunction_sq,
    l2k_norm,
    localization_integral,
    log_norm_sq_exact,
    monomial_context,
    norm_sq_exact,
    pointwise_asymptotic,
    pointwise_asymptotic_boundary,
    pointwise_asymptotic_vertex,
    sup_norm,
)
from .orbit_geometry import (
    PeakData,
    WeightSet,
    b_function,
    character_k,
    f_value,
    hessian_A,
    invert_moment_map,
    moment_map,
    peak_data,
    tail_bound,
    volume_density,
)
from .polytope import (
    Face,
    Polytope,
    VertexChart,
    build_vertex_chart,
    codim_and_d,
    dilate,
    enumerate_lattice_points,
    face_of,
    parse_polytope,
    standard_simplex,
    unit_box,
    validate_delzant,
)
from .projective import (
    HomogenizedIndex,
    b_closed_form,
    binomial_weights,
    detA_closed_form,
    gaussian_profile,
    lq_norm_exact,
    simplex_setup,
    stirling_asymptotics,
)
from .quadrature import IntegralResult, QuadratureSpec, laplace_integral, \
    region_volume

__version__ = "0.1.0"
