//! Shortest path trees on the implicit complete graph, and the growth process
//! they follow in distribution.

mod growth;
mod path;
mod pruned;
mod tree;

pub use growth::{
    depths_from_attachments, height_and_depths, rrt_height, simulate_growth,
    simulate_growth_until, time_to_reach, GrowthTrace, RootedTree, TreeShape,
};
pub use path::PathRecord;
pub use pruned::{all_pairs_hop_stats_pruned, default_threshold, LightEdgeGraph};
pub use tree::{
    all_pairs_hop_stats, dijkstra_spt, dijkstra_truncated, extract_path, spt_restricted,
    HopStats, ShortestPathTree, NO_VERTEX,
};
