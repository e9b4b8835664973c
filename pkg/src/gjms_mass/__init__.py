"""Green functions and conformal masses of GJMS operators on spheres and
spherical space forms.

The Laplacian is the positive one, Delta = -sum_i d_i^2, throughout.
"""
from .asymptotic_mass import (
    BlowupProfile,
    adm_integral,
    blowup_profile,
    mk_surface_integral,
    thm51_check,
)
from .constants import (
    DimPair,
    gjms_constant,
    gjms_constant_exact,
    homogeneous_invertibility,
    radial_power_coefficient,
    vol_sphere,
)
from .errors import (
    ChartPoleError,
    DimensionError,
    GJMSError,
    MetricUndefinedError,
    NonFreeActionError,
    SingularityError,
    StencilDomainError,
)
from .fields import ScalarField, bump, gaussian, poly, round_chart
from .flat_calculus import (
    CurvaturePack,
    DiracGrid,
    conformal_curvature,
    covariance_residual,
    dirac_pairing,
    gjms_second_term_residual,
    paneitz_apply,
    q2_curvature,
)
from .green import (
    GreenKernel,
    conformal_transport_green,
    green_flat,
    green_space_form,
    green_sphere,
)
from .moebius import (
    ChartFrame,
    Dilation,
    Inversion,
    Isometry,
    MoebiusMap,
    SpherePoint,
    chordal_distance,
    from_chart,
    moebius_apply,
    moebius_identity_residual,
    round_factor,
    to_chart,
)
from .space_forms import (
    MassReport,
    SpaceFormGroup,
    covering_mass_residual,
    hj_metric_factor,
    hj_scalar_curvature,
    lens_group,
    mass_closed_form,
    mass_via_limit,
    parse_space,
    validate_group,
)

__version__ = "0.1.0"
