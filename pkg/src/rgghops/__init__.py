"""Hop counts versus Euclidean distance in random geometric graphs."""

from .bounds import (
    BoundParams,
    BoundReport,
    DiameterBound,
    GammaBreakdown,
    bound_report,
    connectivity_threshold,
    diameter_bound,
    gamma,
    lower_bound_hops,
    reference_prior_diameter,
    upper_applicability_radius,
    upper_bound_hops,
)
from .concentration import (
    LogProb,
    TailCheckResult,
    TailQuery,
    failure_probability_lower,
    failure_probability_upper,
    g_function,
    lower_tail_bound,
    monte_carlo_tail,
    upper_tail_bound,
)
from .geometry import (
    Point,
    Rectangle,
    StripInfeasible,
    StripPlacement,
    fit_strip,
    from_strip_frame,
    rect_connectivity_width,
    strip_frame,
    strip_precondition,
    to_strip_frame,
)
from .harness import ExperimentConfig, diameter_experiment, resolve_radius, run_experiment, threshold_sweep, verify_bounds
from .sampler import RggInstance, SeedSpec, sample_exponentials, sample_poissonized, sample_uniform
from .spatial_graph import (
    DiameterEstimate,
    DisconnectedGraph,
    DistanceResult,
    GeoGraph,
    bfs_distance,
    build_graph,
    component_labels,
    corner_vertices,
    diameter,
    is_connected,
)
from .strip_path import (
    PROOF_CONSTANTS,
    ProofConstants,
    StripPathResult,
    choose_alpha,
    empirical_shortfall_law,
    greedy_strip_path,
    lower_chain_certificate,
)

__version__ = "0.1.0"
