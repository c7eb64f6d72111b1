"""Temporal collaboration-network analytics for surgical team encounter logs."""

__version__ = "0.1.0"

from opgraph.ingest import (
    EventRecord,
    Segment,
    SynthConfig,
    dedupe,
    generate_synthetic,
    parse_events,
    segment,
)
from opgraph.graph import (
    BipartiteGraph,
    Graph,
    build_bipartite,
    density,
    largest_component,
    project_one_mode,
    triangle_count,
)
from opgraph.metrics import (
    average_path_length,
    degree_distribution,
    global_clustering,
    local_clustering,
    triangle_ratio,
)
from opgraph.refmodels import (
    NullModelSpec,
    gen_configuration,
    gen_erdos_renyi,
    null_baselines,
)
from opgraph.smallworld import SmallWorldResult, segment_series, small_world_indicator
from opgraph.cohesion import (
    ConstraintReport,
    aggregate_constraint,
    dyadic_constraint,
    proportional_tie,
)
from opgraph.stats import (
    RobustEstimate,
    correlate_series,
    outcome_ratio,
    pearson_r,
    stahel_donoho,
)

__all__ = [
    "BipartiteGraph",
    "ConstraintReport",
    "EventRecord",
    "Graph",
    "NullModelSpec",
    "RobustEstimate",
    "Segment",
    "SmallWorldResult",
    "SynthConfig",
    "aggregate_constraint",
    "average_path_length",
    "build_bipartite",
    "correlate_series",
    "dedupe",
    "degree_distribution",
    "density",
    "dyadic_constraint",
    "gen_configuration",
    "gen_erdos_renyi",
    "generate_synthetic",
    "global_clustering",
    "largest_component",
    "local_clustering",
    "null_baselines",
    "outcome_ratio",
    "parse_events",
    "pearson_r",
    "project_one_mode",
    "proportional_tie",
    "segment",
    "segment_series",
    "small_world_indicator",
    "stahel_donoho",
    "triangle_count",
    "triangle_ratio",
]
