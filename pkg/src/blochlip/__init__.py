"""Weighted lengths and distances, Bloch and Lipschitz numbers of mappings
between weighted domains, and admissible two-point weights."""

from __future__ import annotations

__version__ = "0.1.0"

from .geometry import (
    ConvergenceError,
    Curve,
    Domain,
    DomainError,
    LengthEstimate,
    Partition,
    Weight,
    concat,
    constant_weight,
    curve_length,
    euclidean_distance,
    hyperbolic_weight,
    polygonal_length,
    segment_weighted_length,
    spherical_weight,
    stieltjes_sum,
    unit_weight,
    weighted_length,
)
from .metrics import (
    DisconnectedError,
    GeodesicResult,
    GeodesicSolver,
    SolverConfig,
    chordal_distance,
    hyperbolic_distance,
    metric_axiom_check,
    spherical_distance,
    weighted_distance,
)
from .seminorms import (
    AdmissibleWeight,
    Mapping,
    OperatorMonotoneProfile,
    SeminormEstimate,
    admissibility_check,
    atanh_profile,
    bloch_number,
    canonical_W,
    complex_mapping,
    custom_W,
    holland_walsh_W,
    identity_profile,
    jocic_W,
    lipschitz_number,
    local_dilatation,
    minmax_W,
    normal_W,
    verify_equality,
)
from .testbed import CatalogEntry, catalog, classify, lookup
