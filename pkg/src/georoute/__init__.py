"""Deadlock-free, fault-tolerant multi-tree greedy routing for networks-on-chip."""

from .addressing import (
    address_of,
    encoded_size_bits,
    is_ancestor,
    rle_decode,
    rle_encode,
    tree_distance,
)
from .deadlock import ChannelDependencyGraph, build_cdg, find_cycle
from .errors import (
    InvalidArgument,
    MalformedAddress,
    NotCovered,
    NotInTree,
    RoutingError,
    Unreachable,
)
from .evaluation import (
    ExperimentConfig,
    MetricsReport,
    PairStats,
    adaptiveness,
    pair_stats,
    route_ensemble,
    run_sweep,
    shortest_count,
    shortest_len,
    stretch,
)
from .forest import (
    HORIZONTAL,
    VERTICAL,
    SpanningTree,
    build_forest,
    choose_root,
    grow_tree,
    removable_without_reconfig,
)
from .router import (
    ArcClass,
    Phase,
    RouteTrace,
    RoutingState,
    classify_arc,
    format_trace,
    greedy_candidates,
    legal_next_hops,
    next_hop,
    route,
)
from .topology import (
    Arc,
    Topology,
    build_mesh,
    connected_component,
    inject_link_faults,
    parse_topology,
)

__version__ = "0.1.0"
