use std::fs;
use std::path::Path;

use super::{Multigraph, Partition, StructuralGroups};
use crate::graph::TopicNetwork;
use crate::{Error, Result};

/// Writes `node\tblock` rows in node order.
pub fn write_partition(path: &Path, g: &TopicNetwork, p: &Partition) -> Result<()> {
    let mut out = String::from("node\tblock\n");
    for (node, block) in g.nodes.iter().zip(&p.assignment) {
        out.push_str(&format!("{node}\t{block}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a partition file written for `g` and recomputes its DL.
pub fn read_partition(path: &Path, g: &TopicNetwork, simple_graph: bool) -> Result<Partition> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut assignment = vec![None; g.node_count()];
    for (n, line) in text.lines().enumerate().skip(1) {
        let bad = |message: String| Error::Parse { line: n + 1, message };
        let (node, block) = line.split_once('\t').ok_or_else(|| bad("expected node<TAB>block".into()))?;
        let i = g.index_of(node).ok_or_else(|| bad(format!("node {node} is not in the network")))?;
        assignment[i as usize] = Some(block.trim().parse::<u32>().map_err(|e| bad(e.to_string()))?);
    }
    let assignment: Vec<u32> = assignment
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| Error::InvalidArgument(format!("node {} has no block", g.nodes[i]))))
        .collect::<Result<_>>()?;
    Partition::new(&Multigraph::from_network(g, simple_graph), &assignment)
}

pub fn write_sidecar(path: &Path, result: &StructuralGroups) -> Result<()> {
    let text = serde_json::to_string_pretty(result)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_sidecar(path: &Path) -> Result<StructuralGroups> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
