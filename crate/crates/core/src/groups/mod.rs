//! Structural groups from a planted-partition block model selected by
//! description length, stance-based groupings, and their overlap.

mod content;
mod detect;
mod dl;
mod io;
mod multigraph;

pub use content::{content_groups, group_composition, BlockComposition, GroupComposition, StanceGrouping};
pub use detect::{
    canonical_labels, detect_on, detect_structural_groups, DetectOptions, Partition, RunDiagnostics, StructuralGroups,
};
pub use dl::description_length;
pub use io::{read_partition, read_sidecar, write_partition, write_sidecar};
pub use multigraph::Multigraph;
