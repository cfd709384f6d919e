"""Metric-free multi-agent coverage, event clustering and dispatch toolkit."""

from .bounds import (
    BoundsReport,
    SegmentRect,
    g_exact,
    g_lower,
    g_upper,
    perimeter_correction,
    proof_form_check,
    rect_bounds,
    segmented_lower_bound,
)
from .clustering import ClusterState, clustering, sorted_neighborhood
from .consensus import ConsensusState, DisconnectedSubgraphError, max_consensus
from .coverage import (
    CoverageGrid,
    CoverageResult,
    DeploymentConfig,
    NavigationBudgetError,
    PartialCoverageError,
    RedundancyLabel,
    RipsComplex,
    build_rips,
    coverage_run,
    frontier_slots,
    navigate_to_slot,
    prune_redundant,
    redundant_agent_search,
)
from .dispatch import (
    DispatchConfig,
    Dispatcher,
    DispatchResult,
    FirFilter,
    SessionState,
    VolumeDelta,
    dispatch_loop,
    restricted_neighborhood,
    volume_delta,
)
from .geometry import (
    Obstacle,
    Scenario,
    ValidationReport,
    disk_fits,
    load_scenario,
    point_in_free_space,
    polygon_area,
    polygon_perimeter,
    segment_clear,
    validate_scenario,
)
from .netgraph import (
    ClusterView,
    SwarmGraph,
    cluster_volume,
    cut_weight,
    isoperimetric,
    visible_pair,
    weigh_edges_from_vertices,
)
from .pipeline import RunArtifacts, RunConfig, load_config, replay, run_pipeline
from .sensing import (
    BearingReading,
    EventField,
    NoiseModel,
    TouchConfig,
    bearing,
    contact_direction,
    event_intensity,
    relative_bearing,
    sense_event,
    snr,
    wrap_angle,
)

__version__ = "0.1.0"
