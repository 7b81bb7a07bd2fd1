"""Event-driven simulation and renormalization tools for a periodic
rectangular-scatterer billiard and its unfolded translation surface."""

from .billiard import (
    ParticleState,
    SeriesResult,
    advance,
    count_events,
    displacement_series,
    make_state,
    oracle_raymarch,
    position_delta,
)
from .errors import (
    ConfigError,
    CornerHit,
    Degenerate,
    DomainError,
    GluingError,
    InsufficientData,
    NonClosedCurve,
    NonReturning,
    NotSquareFree,
    RetryExhausted,
    SaddleConnection,
    TieBreak,
    WindtreeError,
)
from .experiments import (
    AngleFit,
    CheckResult,
    CheckSuite,
    DiffusionReport,
    ExperimentConfig,
    LyapunovReport,
    fit_exponent,
    geometric_schedule,
    run_consistency,
    run_deviation_spectrum,
    run_diffusion,
    run_lyapunov,
    sample_angle,
    sample_angles,
)
from .homology import (
    HomologyClass,
    character_component,
    cocycle_F1,
    cocycle_F2,
    deck_action,
    f_evaluation,
    holonomy,
    intersection_matrix,
    pairing,
)
from .iet import (
    FirstReturnResult,
    LabeledIET,
    RauzyRecord,
    ZorichRecord,
    cocycle_product,
    first_return_iet,
    main_transversal,
    rauzy_step,
    separatrix_landings,
    torus_transversal,
    zorich_step,
)
from .lyapunov import (
    LyapunovEstimate,
    SpectrumConfig,
    SpectrumResult,
    character_spectrum,
    lyapunov_exponents,
    spectrum_from_iet,
    stream_exponents,
)
from .surface import (
    PolygonalSurface,
    build_lshape,
    build_surface,
    build_surface_X,
    build_torus,
    character_name,
    character_value,
)
from .tables import TableParams, make_table, veech_params
from .tracking import TrackResult, certify_sqrt2, track, track_intersection
from .version import __version__

__all__ = [
    "AngleFit",
    "CheckResult",
    "CheckSuite",
    "ConfigError",
    "CornerHit",
    "Degenerate",
    "DiffusionReport",
    "DomainError",
    "ExperimentConfig",
    "FirstReturnResult",
    "GluingError",
    "HomologyClass",
    "InsufficientData",
    "LabeledIET",
    "LyapunovEstimate",
    "LyapunovReport",
    "NonClosedCurve",
    "NonReturning",
    "NotSquareFree",
    "ParticleState",
    "PolygonalSurface",
    "RauzyRecord",
    "RetryExhausted",
    "SaddleConnection",
    "SeriesResult",
    "SpectrumConfig",
    "SpectrumResult",
    "TableParams",
    "TieBreak",
    "TrackResult",
    "WindtreeError",
    "ZorichRecord",
    "advance",
    "build_lshape",
    "build_surface",
    "build_surface_X",
    "build_torus",
    "certify_sqrt2",
    "character_component",
    "character_name",
    "character_spectrum",
    "character_value",
    "cocycle_F1",
    "cocycle_F2",
    "cocycle_product",
    "count_events",
    "deck_action",
    "displacement_series",
    "f_evaluation",
    "first_return_iet",
    "fit_exponent",
    "geometric_schedule",
    "holonomy",
    "intersection_matrix",
    "lyapunov_exponents",
    "main_transversal",
    "make_state",
    "make_table",
    "oracle_raymarch",
    "position_delta",
    "rauzy_step",
    "run_consistency",
    "run_deviation_spectrum",
    "run_diffusion",
    "run_lyapunov",
    "sample_angle",
    "sample_angles",
    "pairing",
    "separatrix_landings",
    "spectrum_from_iet",
    "stream_exponents",
    "torus_transversal",
    "track",
    "track_intersection",
    "veech_params",
    "zorich_step",
    "__version__",
]
