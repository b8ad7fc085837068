"""Exact combinatorics and power counting for quartic random tensor models.

The package represents the two equivalent pictures of a quartic-model Feynman
graph (multicoloured graphs on four-valent interaction bubbles, and ciliated
stranded maps with one multicoloured edge per bubble), enumerates them,
evaluates exact amplitudes and 1/N-graded series, cross-checks everything
against a brute-force pairing oracle, and classifies renormalisability of the
associated field theories including the derivative-enhanced rank-4 variants.
"""

from .errors import (
    BudgetExceeded,
    InvalidColourSet,
    MalformedGraph,
    NoBoundary,
    QuartnError,
    RequiresConnected,
    TruncationMismatch,
    UnsupportedBubble,
    UnsupportedModel,
)
from .colours import (
    ENHANCED,
    INVARIANT,
    BoundaryGraph,
    ColourSet,
    IdentityCovariance,
    ModelSpec,
    PowerLaplacian,
    all_canonical,
    canonicalise,
    full_quartic_model,
    melonic_model,
    singletons,
)
from .graphs import (
    COVARIANT,
    DUAL,
    ColouredGraph,
    GraphBuilder,
    boundary_graph,
    build_bubble,
    invariant_amplitude,
)
from .maps import (
    SeriesTerm,
    StrandedMap,
    is_plane_tree,
    map_amplitude,
    map_boundary,
    omega,
    omega_enhanced,
    omega_min,
    omega_standard,
    structural_predicates,
    trace_faces,
)
from .transform import graph_to_map, map_to_graph
from .enumeration import (
    EnumSpec,
    catalan,
    count_maps,
    count_plane_trees,
    count_trees_closed_form,
    count_trees_rooted,
    enumerate_maps,
    enumerate_plane_trees,
    rooted_tree_count_recursive,
)
from .series import (
    FREE_ENERGY,
    LABELLED,
    UNLABELLED,
    FormalSeries,
    assemble_series,
    connected_relation_check,
    melonic_two_point,
    series_exp,
    series_log,
    vacuum_solutions,
)
from .oracle import (
    EdgePolynomial,
    forest_formula_check,
    forest_weight_matrix,
    oracle_cumulant,
    oracle_free_energy,
    oracle_moment,
    oracle_partition_function,
)
from .renorm import (
    DivergenceReport,
    HighSubgraph,
    RenormClass,
    ScaleAttribution,
    classify_degree,
    classify_renormalisability,
    divergence_degree,
    divergence_degree_bubblewise,
    divergence_survey,
    high_nesting_ok,
    high_subgraphs,
    powercount_bound_check,
    subgraph_view,
    t43_a_renormalised,
    t43_counterterms,
    t43_delta_m,
)
from .sweeps import (
    CellReport,
    check_enhanced_degree_identity,
    check_enhanced_leading_order,
    check_exponent_bounds,
    check_external_leg_bound,
    check_face_lemma,
    check_loop_bound,
    check_matrix_genus,
    check_tree_degrees,
    iter_skeletons,
)
from .checks import ALL_CHECKS, CheckResult, run_checks

__version__ = "0.1.0"

__all__ = [
    "ALL_CHECKS",
    "BoundaryGraph",
    "BudgetExceeded",
    "COVARIANT",
    "CellReport",
    "CheckResult",
    "ColourSet",
    "ColouredGraph",
    "DUAL",
    "DivergenceReport",
    "ENHANCED",
    "EdgePolynomial",
    "EnumSpec",
    "FREE_ENERGY",
    "FormalSeries",
    "GraphBuilder",
    "HighSubgraph",
    "INVARIANT",
    "IdentityCovariance",
    "InvalidColourSet",
    "LABELLED",
    "MalformedGraph",
    "ModelSpec",
    "NoBoundary",
    "PowerLaplacian",
    "QuartnError",
    "RenormClass",
    "RequiresConnected",
    "ScaleAttribution",
    "SeriesTerm",
    "StrandedMap",
    "TruncationMismatch",
    "UNLABELLED",
    "UnsupportedBubble",
    "UnsupportedModel",
    "all_canonical",
    "assemble_series",
    "boundary_graph",
    "build_bubble",
    "canonicalise",
    "catalan",
    "check_enhanced_degree_identity",
    "check_enhanced_leading_order",
    "check_exponent_bounds",
    "check_external_leg_bound",
    "check_face_lemma",
    "check_loop_bound",
    "check_matrix_genus",
    "check_tree_degrees",
    "classify_degree",
    "classify_renormalisability",
    "connected_relation_check",
    "count_maps",
    "count_plane_trees",
    "count_trees_closed_form",
    "count_trees_rooted",
    "divergence_degree",
    "divergence_degree_bubblewise",
    "divergence_survey",
    "enumerate_maps",
    "enumerate_plane_trees",
    "forest_formula_check",
    "forest_weight_matrix",
    "full_quartic_model",
    "graph_to_map",
    "high_nesting_ok",
    "high_subgraphs",
    "invariant_amplitude",
    "is_plane_tree",
    "iter_skeletons",
    "map_amplitude",
    "map_boundary",
    "map_to_graph",
    "melonic_model",
    "melonic_two_point",
    "omega",
    "omega_enhanced",
    "omega_min",
    "omega_standard",
    "oracle_cumulant",
    "oracle_free_energy",
    "oracle_moment",
    "oracle_partition_function",
    "powercount_bound_check",
    "rooted_tree_count_recursive",
    "run_checks",
    "series_exp",
    "series_log",
    "singletons",
    "structural_predicates",
    "subgraph_view",
    "t43_a_renormalised",
    "t43_counterterms",
    "t43_delta_m",
    "trace_faces",
    "vacuum_solutions",
]
