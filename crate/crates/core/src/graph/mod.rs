//! Bipartite user/post interactions, their projection to directed user
//! multigraphs, and the per-(topic, window) multilayer bundle.

mod bipartite;
mod io;
mod network;
mod window;

pub use bipartite::{build_bipartite, BipartiteEdge, BipartiteInteractions, BipartiteKind};
pub use io::{graph_path, load_network, read_graph, save_network, write_csv, write_graph};
pub use network::{
    build_bundle, build_follow_block_layers, network_stats, project, project_reposts, Edge, Interaction,
    MultilayerBundle, NetworkStats, ProjectionTally, TopicNetwork,
};
pub use window::TimeWindow;
