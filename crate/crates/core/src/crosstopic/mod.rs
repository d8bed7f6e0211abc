//! Relationships between topic networks: user overlap, overlap hypergraphs,
//! grouping alignment and joint stance distributions.

mod alignment;
mod hypergraph;
mod joint;
mod overlap;

pub use alignment::{
    alignment_matrix, grouping_from_partition, grouping_from_stances, nmi, nmi_alignment, AlignmentMatrix, Grouping,
    GroupingSource, NmiNormalization,
};
pub use hypergraph::{topic_hypergraph, TopicHypergraph};
pub use joint::{joint_stance_table, JointStanceTable};
pub use overlap::{jaccard, jaccard_matrix, OverlapMatrix};

/// Writes a labelled square matrix as CSV; absent cells are `--`.
pub(crate) fn matrix_csv(labels: &[String], values: &[Vec<Option<f64>>]) -> String {
    let mut out = String::from("topic");
    for l in labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (l, row) in labels.iter().zip(values) {
        out.push_str(l);
        for v in row {
            out.push(',');
            match v {
                Some(x) => out.push_str(&format!("{x:.6}")),
                None => out.push_str("--"),
            }
        }
        out.push('\n');
    }
    out
}
