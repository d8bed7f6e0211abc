use serde::{Deserialize, Serialize};

use super::OverlapMatrix;
use crate::{Error, Result};

/// Maximal cliques of the thresholded overlap graph, each of size ≥ 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicHypergraph {
    pub labels: Vec<String>,
    pub threshold: f64,
    /// Edges need `J > threshold` when strict, `J ≥ threshold` otherwise.
    pub strict: bool,
    /// Sorted node indices per hyperedge; hyperedges in lexicographic order.
    pub hyperedges: Vec<Vec<usize>>,
}

impl TopicHypergraph {
    pub fn named_hyperedges(&self) -> Vec<Vec<&str>> {
        self.hyperedges.iter().map(|h| h.iter().map(|&i| self.labels[i].as_str()).collect()).collect()
    }
}

fn bron_kerbosch(
    adj: &[Vec<bool>],
    r: &mut Vec<usize>,
    mut p: Vec<usize>,
    mut x: Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() && x.is_empty() {
        out.push(r.clone());
        return;
    }
    // Pivot on the vertex with the most neighbours in P.
    let pivot = p
        .iter()
        .chain(&x)
        .copied()
        .max_by_key(|&u| (p.iter().filter(|&&v| adj[u][v]).count(), std::cmp::Reverse(u)))
        .expect("P or X is non-empty");
    let candidates: Vec<usize> = p.iter().copied().filter(|&v| !adj[pivot][v]).collect();
    for v in candidates {
        r.push(v);
        let np = p.iter().copied().filter(|&u| adj[v][u]).collect();
        let nx = x.iter().copied().filter(|&u| adj[v][u]).collect();
        bron_kerbosch(adj, r, np, nx, out);
        r.pop();
        p.retain(|&u| u != v);
        x.push(v);
    }
}

pub fn topic_hypergraph(m: &OverlapMatrix, threshold: f64, strict: bool) -> Result<TopicHypergraph> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} outside (0, 1)")));
    }
    let n = m.labels.len();
    let qualifies = |v: Option<f64>| v.is_some_and(|v| if strict { v > threshold } else { v >= threshold });
    let adj: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i != j && qualifies(m.get(i, j))).collect()).collect();
    let mut cliques = Vec::new();
    bron_kerbosch(&adj, &mut Vec::new(), (0..n).collect(), Vec::new(), &mut cliques);
    let mut hyperedges: Vec<Vec<usize>> = cliques
        .into_iter()
        .filter(|c| c.len() >= 2)
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .collect();
    hyperedges.sort();
    Ok(TopicHypergraph { labels: m.labels.clone(), threshold, strict, hyperedges })
}
