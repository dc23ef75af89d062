"""Exact and sampled counting of duration-bounded temporal motifs.

The package covers the full pipeline: parsing or generating timestamped
edge streams, exact motif counting via windowed chronological backtracking
(with a brute-force oracle for cross-checking), unbiased count estimation
under independent edge sampling with variance and confidence intervals,
asymptotic-regime diagnostics, closed-form expected counts under the
uniform Poisson model, and a reproducible experiment harness.
"""

from .counting import (
    InvariantViolation,
    LocalCountProfile,
    brute_force_count,
    exact_count,
    local_count,
)
from .estimation import (
    ConditionDiagnostics,
    ReplicateRow,
    ReplicateTable,
    SampleEstimate,
    SampleMask,
    derive_seed,
    diagnostics,
    draw_mask,
    ht_estimate,
    normal_quantile,
    replicate_estimates,
)
from .experiments import (
    ExperimentResult,
    ExperimentSpec,
    fd_histogram,
    run_coverage_experiment,
    run_deterministic_experiment,
    run_stochastic_experiment,
    wilson_interval,
)
from .generate import (
    SBMPoissonConfig,
    UniformPoissonConfig,
    generate_fixed_length,
    generate_sbm,
    generate_uniform,
)
from .motif import (
    DeltaQuery,
    MotifError,
    MotifSpec,
    cyclic_triangle,
    load_motif,
    matches_instance,
    validate_motif,
)
from .stream import (
    NodeRegistry,
    ParseError,
    TemporalEdge,
    TemporalStream,
    parse_stream,
    stream_slice,
    write_stream,
)
from .theory import (
    TheoryParams,
    expected_count_uniform,
    motif_match_probability,
    pi_closed_form_l2,
    pi_lower_bound,
    pi_monte_carlo,
)

__version__ = "0.1.0"

__all__ = [
    "ConditionDiagnostics",
    "DeltaQuery",
    "ExperimentResult",
    "ExperimentSpec",
    "InvariantViolation",
    "LocalCountProfile",
    "MotifError",
    "MotifSpec",
    "NodeRegistry",
    "ParseError",
    "ReplicateRow",
    "ReplicateTable",
    "SBMPoissonConfig",
    "SampleEstimate",
    "SampleMask",
    "TemporalEdge",
    "TemporalStream",
    "TheoryParams",
    "UniformPoissonConfig",
    "brute_force_count",
    "cyclic_triangle",
    "derive_seed",
    "diagnostics",
    "draw_mask",
    "exact_count",
    "expected_count_uniform",
    "fd_histogram",
    "generate_fixed_length",
    "generate_sbm",
    "generate_uniform",
    "ht_estimate",
    "load_motif",
    "local_count",
    "matches_instance",
    "motif_match_probability",
    "normal_quantile",
    "parse_stream",
    "pi_closed_form_l2",
    "pi_lower_bound",
    "pi_monte_carlo",
    "replicate_estimates",
    "run_coverage_experiment",
    "run_deterministic_experiment",
    "run_stochastic_experiment",
    "stream_slice",
    "validate_motif",
    "wilson_interval",
    "write_stream",
]
