"""Numerical probes of limit sets of Kleinian groups.

Hyperbolic space is handled through SL(2, C) acting on Hermitian matrices;
the boundary circle and sphere appear as unit vectors.  The main entry
points are re-exported here.
"""

from .classify import (
    EscapeProfile,
    Verdict,
    box_dimension_estimate,
    classify_point,
    escape_profile,
    myrberg_score,
    test_big_horospheric,
    test_horospheric,
    test_lambda,
    test_lambda_star,
    test_radial,
    test_shadow_limit,
)
from .coded import CodedPoint, WordPoint, horoball_depth, phi_value
from .config import ExperimentConfig, load_experiment, load_presentation
from .errors import (
    ClassificationError,
    ConstructionError,
    ContractError,
    DegeneratePointError,
    DomainError,
    HorolabError,
    InsufficientDataError,
    PreconditionError,
    ResourceError,
)
from .experiments import (
    ProbeReport,
    dimension_sweep,
    probe_measure_difference,
    probe_myr_in_horo,
    reproduce_expnew,
)
from .geometry import Isometry, busemann, hyperbolic_distance
from .groups import (
    Cap,
    OrbitSet,
    SchottkyPresentation,
    build_schottky,
    enumerate_orbit,
    projection,
    exponent_sum,
    suborbit,
    symmetric_schottky,
)
from .measures import (
    AtomicMeasure,
    conformal_defect,
    critical_exponent_estimate,
    patterson_approx,
    poincare_partial,
)

__version__ = "0.1.0"

__all__ = [
    "CodedPoint", "WordPoint", "horoball_depth", "phi_value",
    "ExperimentConfig", "load_experiment", "load_presentation",
    "Isometry", "busemann", "hyperbolic_distance",
    "AtomicMeasure",
    "Cap",
    "ClassificationError",
    "ConstructionError",
    "ContractError",
    "DegeneratePointError",
    "DomainError",
    "EscapeProfile",
    "HorolabError",
    "InsufficientDataError",
    "OrbitSet",
    "PreconditionError",
    "ProbeReport",
    "ResourceError",
    "SchottkyPresentation",
    "Verdict",
    "box_dimension_estimate",
    "build_schottky",
    "classify_point",
    "conformal_defect",
    "critical_exponent_estimate",
    "dimension_sweep",
    "enumerate_orbit",
    "escape_profile",
    "exponent_sum",
    "myrberg_score",
    "patterson_approx",
    "poincare_partial",
    "probe_measure_difference",
    "probe_myr_in_horo",
    "projection",
    "reproduce_expnew",
    "suborbit",
    "symmetric_schottky",
    "test_big_horospheric",
    "test_horospheric",
    "test_lambda",
    "test_lambda_star",
    "test_radial",
    "test_shadow_limit",
]
