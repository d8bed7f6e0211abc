use crate::annotate::Stance;
use crate::graph::TopicNetwork;
use crate::groups::{Partition, StanceGrouping};
use crate::{Error, Result};

/// A graph whose scored nodes carry a group label.
///
/// Only the group mixing counts are kept: `mix[g][h]` is the number of edges
/// (with multiplicity) from a node in group `g` to a node in group `h`.
/// Self-loops and edges touching unscored nodes are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedGraphView {
    names: Vec<String>,
    sizes: Vec<u64>,
    mix: Vec<u64>,
}

impl GroupedGraphView {
    /// `labels[i]` is the group of node `i`, `None` for unscored nodes.
    pub fn new(
        names: Vec<String>,
        labels: &[Option<u32>],
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self> {
        let k = names.len();
        let mut sizes = vec![0u64; k];
        for &l in labels.iter().flatten() {
            let slot = sizes
                .get_mut(l as usize)
                .ok_or_else(|| Error::InvalidArgument(format!("group {l} out of range for {k} groups")))?;
            *slot += 1;
        }
        let mut mix = vec![0u64; k * k];
        for (s, t) in edges {
            if s == t {
                continue;
            }
            let label = |i: u32| labels.get(i as usize).copied().flatten();
            if let (Some(a), Some(b)) = (label(s), label(t)) {
                mix[a as usize * k + b as usize] += 1;
            }
        }
        Ok(Self { names, sizes, mix })
    }

    pub fn from_partition(g: &TopicNetwork, p: &Partition) -> Result<Self> {
        if p.assignment.len() != g.node_count() {
            return Err(Error::InvalidArgument("partition does not cover the network".into()));
        }
        let names = (0..p.blocks).map(block_name).collect();
        let labels: Vec<Option<u32>> = p.assignment.iter().map(|&b| Some(b)).collect();
        Self::new(names, &labels, g.edges.iter().map(|e| (e.source, e.target)))
    }

    /// Groups `[A, B]`, or `[A, B, neutral]` with `include_neutral`, where
    /// `a` is the stance of group A and `b` that of group B.
    pub fn from_stances(
        g: &TopicNetwork,
        s: &StanceGrouping,
        a: Stance,
        b: Stance,
        include_neutral: bool,
    ) -> Result<Self> {
        if s.assignment.len() != g.node_count() {
            return Err(Error::InvalidArgument("stance grouping does not cover the network".into()));
        }
        let mut names = vec![a.to_string(), b.to_string()];
        if include_neutral {
            names.push(Stance::Neutral.to_string());
        }
        let labels: Vec<Option<u32>> = s
            .assignment
            .iter()
            .map(|st| match st {
                Some(x) if *x == a => Some(0),
                Some(x) if *x == b => Some(1),
                Some(Stance::Neutral) if include_neutral => Some(2),
                _ => None,
            })
            .collect();
        Self::new(names, &labels, g.edges.iter().map(|e| (e.source, e.target)))
    }

    pub fn group_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn size(&self, g: usize) -> u64 {
        self.sizes[g]
    }

    /// Number of scored nodes.
    pub fn scored_nodes(&self) -> u64 {
        self.sizes.iter().sum()
    }

    pub fn mixing(&self, from: usize, to: usize) -> u64 {
        self.mix[from * self.names.len() + to]
    }

    pub fn edge_total(&self) -> u64 {
        self.mix.iter().sum()
    }

    pub(crate) fn check_group(&self, g: usize) -> Result<()> {
        if g >= self.names.len() {
            return Err(Error::InvalidArgument(format!("no group {g}")));
        }
        if self.sizes[g] == 0 {
            return Err(Error::Precondition(format!("group {} is empty", self.names[g])));
        }
        Ok(())
    }
}

/// Letter names `A`, `B`, ... for structural blocks.
pub(crate) fn block_name(b: usize) -> String {
    if b < 26 {
        char::from(b'A' + b as u8).to_string()
    } else {
        format!("G{b}")
    }
}
