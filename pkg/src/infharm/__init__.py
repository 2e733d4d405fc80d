"""Numerical toolkit for infinity harmonic maps between Riemannian manifolds."""

from .catalog import CatalogEntry, SampleRegion, catalog_entries, catalog_get, catalog_list, witness_residual
from .conformal import (
    ConformalFactor,
    conformal_inf_laplacian,
    conformal_metric,
    hyperbolic_equation_residual,
    hyperbolic_factor,
    sphere_equation_residual,
    sphere_factor,
    sphere_restriction_residual,
)
from .constructions import (
    build_direct_sum,
    build_eikonal_tuple,
    build_line_map,
    build_product_map,
    check_identity_map,
    product_metric,
)
from .errors import (  # noqa: F401
    InfharmError,
    ArgumentError,
    SingularPointError,
    DegenerateMetricError,
    OutOfDomainError,
    ValidationError,
    InfeasibleConstantError,
    WrongRegimeError,
    DegenerateProbeError,
    UnknownEntryError,
    ParseError,
    InvalidFactorError,
)
from .geometry import Chart, Metric, SmoothMap, christoffel, differential_frame, metric_gradient, scalar_map
from .inflap import (
    HORIZONTALLY_HOMOTHETIC,
    HWC,
    INFINITY_HARMONIC,
    MORPHISM,
    NONE,
    Classification,
    classify,
    energy_density,
    inf_laplacian_function,
    inf_laplacian_map,
    map_report,
    p_laplacian,
    tension_field,
)
from .jets import Jet2
from .reductions import (
    cylinder_constant,
    cylinder_kink,
    cylinder_pendulum,
    equator,
    reconstruct,
    reconstruct_and_verify,
    solve_ball_profile,
)

__version__ = "0.1.0"
