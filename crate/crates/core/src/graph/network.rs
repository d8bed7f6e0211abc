use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BipartiteInteractions, BipartiteKind, TimeWindow};
use crate::annotate::Topic;
use crate::ingest::UserEdgeRecord;
use crate::{Error, Result};

/// Interaction type τ of a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interaction {
    Likes,
    Reposts,
    Follows,
    Blocks,
}

impl Interaction {
    pub const ALL: [Interaction; 4] = [Self::Likes, Self::Reposts, Self::Follows, Self::Blocks];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Likes => "likes",
            Self::Reposts => "reposts",
            Self::Follows => "follows",
            Self::Blocks => "blocks",
        }
    }
}

impl fmt::Display for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Interaction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown interaction type `{s}`")))
    }
}

/// A directed edge between node indices; `timestamp` is unix seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub source: u32,
    pub target: u32,
    pub timestamp: i64,
}

/// Edges dropped while building a layer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionTally {
    pub self_loops: u64,
    pub dangling: u64,
    pub out_of_set: u64,
}

/// Directed multigraph `G^τ_{x,t}`.
///
/// Nodes are sorted user ids and edges are sorted by
/// `(source, target, timestamp)`, so equal graphs have equal bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicNetwork {
    pub topic: Topic,
    pub window: TimeWindow,
    pub interaction: Interaction,
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    pub tally: ProjectionTally,
}

impl TopicNetwork {
    /// Builds a network from user-id edges, canonicalizing node and edge order.
    /// Nodes listed in `extra_nodes` are kept even without edges.
    pub fn from_named_edges<'a>(
        topic: Topic,
        window: TimeWindow,
        interaction: Interaction,
        edges: impl IntoIterator<Item = (&'a str, &'a str, i64)>,
        extra_nodes: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        let edges: Vec<_> = edges.into_iter().collect();
        let mut names: BTreeSet<&str> = extra_nodes.into_iter().collect();
        for (s, t, _) in &edges {
            names.insert(s);
            names.insert(t);
        }
        let nodes: Vec<String> = names.into_iter().map(str::to_string).collect();
        let index: HashMap<&str, u32> = nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i as u32)).collect();
        let mut edges: Vec<Edge> =
            edges.into_iter().map(|(s, t, ts)| Edge { source: index[s], target: index[t], timestamp: ts }).collect();
        edges.sort_unstable();
        Self { topic, window, interaction, nodes, edges, tally: ProjectionTally::default() }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn index_of(&self, user: &str) -> Option<u32> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(user)).ok().map(|i| i as u32)
    }

    /// `(source, target)` pairs, multiplicities included.
    pub fn edge_pairs(&self) -> Vec<(u32, u32)> {
        self.edges.iter().map(|e| (e.source, e.target)).collect()
    }
}

/// Projects the interactions of `kind` to a user multigraph with one edge
/// per interaction, from the acting user to the post author.
///
/// Self-interactions are suppressed and tallied. Nodes are the users with at
/// least one edge; `include_isolated` adds every other topic participant.
pub fn project(
    b: &BipartiteInteractions,
    kind: BipartiteKind,
    topic: Topic,
    window: TimeWindow,
    include_isolated: bool,
) -> TopicNetwork {
    let interaction = match kind {
        BipartiteKind::Like => Interaction::Likes,
        _ => Interaction::Reposts,
    };
    let mut self_loops = 0;
    let edges = b.edges.iter().filter(|e| e.kind == kind).filter_map(|e| {
        let author = b.post_authors[e.post as usize];
        if author == e.user {
            self_loops += 1;
            return None;
        }
        Some((b.users[e.user as usize].as_str(), b.users[author as usize].as_str(), e.timestamp.timestamp()))
    });
    let edges: Vec<_> = edges.collect();
    let extra: Vec<&str> = if include_isolated { b.users.iter().map(String::as_str).collect() } else { Vec::new() };
    let mut g = TopicNetwork::from_named_edges(topic, window, interaction, edges, extra);
    g.tally = ProjectionTally { self_loops, dangling: b.dangling, out_of_set: 0 };
    g
}

pub fn project_reposts(
    b: &BipartiteInteractions,
    topic: Topic,
    window: TimeWindow,
    include_isolated: bool,
) -> TopicNetwork {
    project(b, BipartiteKind::Repost, topic, window, include_isolated)
}

fn induced_layer(
    nodes: &[String],
    records: &[UserEdgeRecord],
    topic: Topic,
    window: TimeWindow,
    interaction: Interaction,
) -> TopicNetwork {
    let set: BTreeSet<&str> = nodes.iter().map(String::as_str).collect();
    let mut tally = ProjectionTally::default();
    let mut edges = Vec::new();
    for r in records.iter().filter(|r| window.contains(r.timestamp)) {
        if r.source == r.subject {
            tally.self_loops += 1;
        } else if set.contains(r.source.as_str()) && set.contains(r.subject.as_str()) {
            edges.push((r.source.as_str(), r.subject.as_str(), r.timestamp.timestamp()));
        } else {
            tally.out_of_set += 1;
        }
    }
    let mut g = TopicNetwork::from_named_edges(topic, window, interaction, edges, set);
    g.tally = tally;
    g
}

/// Follow and block layers induced on `nodes`.
pub fn build_follow_block_layers(
    nodes: &[String],
    follows: &[UserEdgeRecord],
    blocks: &[UserEdgeRecord],
    topic: Topic,
    window: TimeWindow,
) -> (TopicNetwork, TopicNetwork) {
    (
        induced_layer(nodes, follows, topic, window, Interaction::Follows),
        induced_layer(nodes, blocks, topic, window, Interaction::Blocks),
    )
}

/// The `(likes, reposts, follows, blocks)` tuple for one topic and window.
#[derive(Debug, Clone)]
pub struct MultilayerBundle {
    pub topic: Topic,
    pub window: TimeWindow,
    /// `V^likes ∪ V^reposts`.
    pub nodes: Vec<String>,
    pub likes: TopicNetwork,
    pub reposts: TopicNetwork,
    pub follows: TopicNetwork,
    pub blocks: TopicNetwork,
}

impl MultilayerBundle {
    pub fn layer(&self, tau: Interaction) -> &TopicNetwork {
        match tau {
            Interaction::Likes => &self.likes,
            Interaction::Reposts => &self.reposts,
            Interaction::Follows => &self.follows,
            Interaction::Blocks => &self.blocks,
        }
    }
}

pub fn build_bundle(
    b: &BipartiteInteractions,
    follows: &[UserEdgeRecord],
    blocks: &[UserEdgeRecord],
    topic: Topic,
    window: TimeWindow,
    include_isolated: bool,
) -> MultilayerBundle {
    let likes = project(b, BipartiteKind::Like, topic, window, include_isolated);
    let reposts = project(b, BipartiteKind::Repost, topic, window, include_isolated);
    let nodes: Vec<String> =
        likes.nodes.iter().chain(&reposts.nodes).collect::<BTreeSet<_>>().into_iter().cloned().collect();
    let (follows, blocks) = build_follow_block_layers(&nodes, follows, blocks, topic, window);
    MultilayerBundle { topic, window, nodes, likes, reposts, follows, blocks }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub nodes: u64,
    pub edges: u64,
    pub average_degree: f64,
}

impl NetworkStats {
    /// Average degree is `2|E|/|V|`, counting parallel edges.
    pub fn from_counts(nodes: u64, edges: u64) -> Self {
        let average_degree = if nodes == 0 { 0.0 } else { 2.0 * edges as f64 / nodes as f64 };
        Self { nodes, edges, average_degree }
    }
}

pub fn network_stats(g: &TopicNetwork) -> NetworkStats {
    NetworkStats::from_counts(g.node_count() as u64, g.edge_count() as u64)
}
