"""Range and angle Cramer-Rao bounds for modular antenna arrays.

The package models a modular linear array observing a near-field point
target through one of four wavefront approximations, provides closed-form
range/angle Cramer-Rao bounds with their degenerate cases, a generic
Fisher-information oracle that certifies the closed forms, and a small
toolkit (configs, presets, sweeps, CLI) to reproduce the reference
experiments.
"""

from .config import (
    PRESET_NAMES,
    SPEED_OF_LIGHT,
    ExperimentConfig,
    load_config,
    parse_config,
    parse_models,
    preset,
    serialize_config,
)
from .crb import (
    FLAG_DEGENERATE,
    FLAG_ENDFIRE,
    CrbPair,
    HspmIntermediates,
    SensingSnr,
    SwmIntermediates,
    boresight_far_range_bound,
    crb_boresight,
    crb_boresight_far,
    crb_bounds,
    crb_hspm_dist,
    crb_hspm_shared,
    crb_pwm,
    crb_swm,
    intermediates_hspm,
    intermediates_swm,
    optimal_spread,
)
from .errors import InvalidConfigurationError, NumericDomainError, SingularGeometryError
from .geometry import (
    BistaticGeometry,
    FieldRegions,
    ModularLayout,
    TargetPolar,
    build_layout,
    element_range,
    field_regions,
    radial_shift,
    radial_terms,
    subarray_range,
    subarray_sine,
    tx_steering,
    tx_transform,
)
from .oracle import (
    FimTerms,
    ValidationReport,
    VerificationSummary,
    crb_from_steering,
    cross_validate,
    fd_derivatives,
    fd_rebased,
    fim_terms,
    oracle_dtype,
    relative_error,
    sample_case,
    verify_batch,
)
from .sweeps import (
    CSV_HEADER,
    SweepRecord,
    emit_outputs,
    read_csv,
    run_layout_sweep,
    run_point,
    run_range_sweep,
    write_csv,
    write_json,
    write_plot_script,
)
from .wavefront import (
    MODEL_ORDER,
    SteeringDerivatives,
    SteeringVector,
    WavefrontModel,
    phase_increment,
    steering,
    steering_derivatives,
)

__version__ = "0.1.0"

__all__ = [
    "BistaticGeometry",
    "CSV_HEADER",
    "CrbPair",
    "ExperimentConfig",
    "FLAG_DEGENERATE",
    "FLAG_ENDFIRE",
    "FieldRegions",
    "FimTerms",
    "HspmIntermediates",
    "InvalidConfigurationError",
    "MODEL_ORDER",
    "ModularLayout",
    "NumericDomainError",
    "PRESET_NAMES",
    "SPEED_OF_LIGHT",
    "SensingSnr",
    "SingularGeometryError",
    "SteeringDerivatives",
    "SteeringVector",
    "SweepRecord",
    "SwmIntermediates",
    "TargetPolar",
    "ValidationReport",
    "VerificationSummary",
    "WavefrontModel",
    "boresight_far_range_bound",
    "build_layout",
    "crb_boresight",
    "crb_boresight_far",
    "crb_bounds",
    "crb_from_steering",
    "crb_hspm_dist",
    "crb_hspm_shared",
    "crb_pwm",
    "crb_swm",
    "cross_validate",
    "element_range",
    "emit_outputs",
    "fd_derivatives",
    "fd_rebased",
    "field_regions",
    "fim_terms",
    "intermediates_hspm",
    "intermediates_swm",
    "load_config",
    "optimal_spread",
    "oracle_dtype",
    "parse_config",
    "parse_models",
    "phase_increment",
    "preset",
    "radial_shift",
    "radial_terms",
    "read_csv",
    "relative_error",
    "run_layout_sweep",
    "run_point",
    "run_range_sweep",
    "sample_case",
    "serialize_config",
    "steering",
    "steering_derivatives",
    "subarray_range",
    "subarray_sine",
    "tx_steering",
    "tx_transform",
    "verify_batch",
    "write_csv",
    "write_json",
    "write_plot_script",
]
