use crate::graph::TopicNetwork;
use crate::{Error, Result};

/// Compressed directed multigraph used by the block model.
///
/// Neighbour lists hold `(node, multiplicity)` and exclude self-loops, which
/// are counted separately. Degrees include self-loops.
#[derive(Debug, Clone)]
pub struct Multigraph {
    n: usize,
    m: u64,
    out_off: Vec<usize>,
    out_adj: Vec<(u32, u64)>,
    in_off: Vec<usize>,
    in_adj: Vec<(u32, u64)>,
    out_deg: Vec<u64>,
    in_deg: Vec<u64>,
    self_loops: u64,
    ln_mult_factorials: f64,
}

fn csr(
    n: usize,
    pairs: &[(u32, u32, u64)],
    key: impl Fn(&(u32, u32, u64)) -> (u32, u32),
) -> (Vec<usize>, Vec<(u32, u64)>) {
    let mut off = vec![0usize; n + 1];
    for p in pairs {
        off[key(p).0 as usize + 1] += 1;
    }
    for i in 0..n {
        off[i + 1] += off[i];
    }
    let mut fill = off.clone();
    let mut adj = vec![(0u32, 0u64); pairs.len()];
    for p in pairs {
        let (a, b) = key(p);
        adj[fill[a as usize]] = (b, p.2);
        fill[a as usize] += 1;
    }
    for i in 0..n {
        adj[off[i]..off[i + 1]].sort_unstable();
    }
    (off, adj)
}

impl Multigraph {
    pub fn new(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        if let Some(&(s, t)) = edges.iter().find(|(s, t)| *s as usize >= n || *t as usize >= n) {
            return Err(Error::InvalidArgument(format!("edge {s}->{t} outside {n} nodes")));
        }
        let mut sorted = edges.to_vec();
        sorted.sort_unstable();
        let mut pairs: Vec<(u32, u32, u64)> = Vec::new();
        for (s, t) in sorted {
            match pairs.last_mut() {
                Some(last) if last.0 == s && last.1 == t => last.2 += 1,
                _ => pairs.push((s, t, 1)),
            }
        }
        let mut out_deg = vec![0u64; n];
        let mut in_deg = vec![0u64; n];
        let mut self_loops = 0;
        let mut ln_mult_factorials = 0.0;
        for &(s, t, c) in &pairs {
            out_deg[s as usize] += c;
            in_deg[t as usize] += c;
            if s == t {
                self_loops += c;
            }
            ln_mult_factorials += (2..=c).map(|k| (k as f64).ln()).sum::<f64>();
        }
        let proper: Vec<_> = pairs.into_iter().filter(|p| p.0 != p.1).collect();
        let (out_off, out_adj) = csr(n, &proper, |p| (p.0, p.1));
        let (in_off, in_adj) = csr(n, &proper, |p| (p.1, p.0));
        Ok(Self {
            n,
            m: edges.len() as u64,
            out_off,
            out_adj,
            in_off,
            in_adj,
            out_deg,
            in_deg,
            self_loops,
            ln_mult_factorials,
        })
    }

    /// The network's edges, optionally collapsed to one edge per ordered pair.
    pub fn from_network(g: &TopicNetwork, simple: bool) -> Self {
        let mut pairs = g.edge_pairs();
        if simple {
            pairs.sort_unstable();
            pairs.dedup();
        }
        Self::new(g.node_count(), &pairs).expect("network edges reference its nodes")
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> u64 {
        self.m
    }

    pub fn out_degree(&self, i: usize) -> u64 {
        self.out_deg[i]
    }

    pub fn in_degree(&self, i: usize) -> u64 {
        self.in_deg[i]
    }

    pub fn self_loops(&self) -> u64 {
        self.self_loops
    }

    /// `Σ ln A_ij!` over ordered pairs.
    pub fn ln_multiplicity_factorials(&self) -> f64 {
        self.ln_mult_factorials
    }

    /// Out-neighbours with multiplicities, self-loops excluded.
    pub fn out_neighbors(&self, i: usize) -> &[(u32, u64)] {
        &self.out_adj[self.out_off[i]..self.out_off[i + 1]]
    }

    /// In-neighbours with multiplicities, self-loops excluded.
    pub fn in_neighbors(&self, i: usize) -> &[(u32, u64)] {
        &self.in_adj[self.in_off[i]..self.in_off[i + 1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicities_and_loops() {
        let g = Multigraph::new(3, &[(0, 1), (0, 1), (1, 2), (2, 2)]).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.out_neighbors(0), &[(1, 2)]);
        assert_eq!(g.in_neighbors(1), &[(0, 2)]);
        assert_eq!(g.out_degree(2), 1);
        assert_eq!(g.in_degree(2), 2);
        assert_eq!(g.self_loops(), 1);
        assert!((g.ln_multiplicity_factorials() - 2f64.ln()).abs() < 1e-15);
        assert!(Multigraph::new(2, &[(0, 2)]).is_err());
    }
}
