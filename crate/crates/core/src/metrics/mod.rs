//! Polarization and homophily indices over grouped graphs.

mod indices;
mod pairwise;
mod report;
mod view;

pub use indices::{aei, assortativity, coleman, simpson, simpson_all_groups, FRACTION_SUM_TOLERANCE};
pub use pairwise::{pairwise_aei, PairwiseAei};
pub use report::{metric_report, structural_report, MetricOptions, MetricReport, StructuralReport};
pub use view::GroupedGraphView;
