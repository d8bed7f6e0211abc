use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Partition;
use crate::annotate::{Stance, StanceLabel, Topic};
use crate::graph::TopicNetwork;
use crate::{Error, Result};

/// Stance of each network node, `None` where the node has no label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StanceGrouping {
    pub topic: Topic,
    pub assignment: Vec<Option<Stance>>,
    pub coverage: f64,
    pub unlabeled: usize,
}

impl StanceGrouping {
    /// Labelled node counts in `[for, neutral, against]` order.
    pub fn counts(&self) -> [u64; 3] {
        let mut c = [0u64; 3];
        for s in self.assignment.iter().flatten() {
            c[s.index()] += 1;
        }
        c
    }

    /// Stance fractions over labelled nodes.
    pub fn fractions(&self) -> Option<[f64; 3]> {
        let c = self.counts();
        let total: u64 = c.iter().sum();
        (total > 0).then(|| c.map(|x| x as f64 / total as f64))
    }
}

/// Restricts stance labels of `g`'s topic to `g`'s nodes.
pub fn content_groups(stances: &[StanceLabel], g: &TopicNetwork) -> Result<StanceGrouping> {
    let mut by_user: HashMap<&str, Stance> = HashMap::new();
    for l in stances.iter().filter(|l| l.topic == g.topic) {
        if let Some(prev) = by_user.insert(&l.user, l.stance) {
            if prev != l.stance {
                return Err(Error::InvalidArgument(format!("user {} has two stances on {}", l.user, g.topic)));
            }
        }
    }
    let assignment: Vec<Option<Stance>> = g.nodes.iter().map(|n| by_user.get(n.as_str()).copied()).collect();
    let unlabeled = assignment.iter().filter(|s| s.is_none()).count();
    let coverage = if assignment.is_empty() { 0.0 } else { 1.0 - unlabeled as f64 / assignment.len() as f64 };
    Ok(StanceGrouping { topic: g.topic, assignment, coverage, unlabeled })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockComposition {
    pub block: u32,
    pub size: u64,
    /// `[for, neutral, against]` counts.
    pub histogram: [u64; 3],
    pub unlabeled: u64,
    /// Share of labelled members holding the globally dominant stance.
    pub dominant_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComposition {
    /// Most frequent stance over all labelled nodes; ties go to the earlier
    /// of `for, neutral, against`.
    pub dominant: Option<Stance>,
    pub blocks: Vec<BlockComposition>,
    pub max_dominant_share: Option<f64>,
    pub min_dominant_share: Option<f64>,
}

pub fn group_composition(p: &Partition, s: &StanceGrouping) -> Result<GroupComposition> {
    if p.assignment.len() != s.assignment.len() {
        return Err(Error::InvalidArgument(format!(
            "partition has {} nodes, stance grouping {}",
            p.assignment.len(),
            s.assignment.len()
        )));
    }
    let totals = s.counts();
    let dominant = (totals.iter().sum::<u64>() > 0).then(|| {
        let mut best = 0;
        for i in 1..3 {
            if totals[i] > totals[best] {
                best = i;
            }
        }
        Stance::ALL[best]
    });
    let mut blocks: Vec<BlockComposition> = (0..p.blocks as u32)
        .map(|block| BlockComposition { block, size: 0, histogram: [0; 3], unlabeled: 0, dominant_share: None })
        .collect();
    for (&b, st) in p.assignment.iter().zip(&s.assignment) {
        let c = &mut blocks[b as usize];
        c.size += 1;
        match st {
            Some(st) => c.histogram[st.index()] += 1,
            None => c.unlabeled += 1,
        }
    }
    if let Some(d) = dominant {
        for c in &mut blocks {
            let labelled: u64 = c.histogram.iter().sum();
            c.dominant_share = (labelled > 0).then(|| c.histogram[d.index()] as f64 / labelled as f64);
        }
    }
    let shares = blocks.iter().filter_map(|c| c.dominant_share);
    let max_dominant_share = shares.clone().reduce(f64::max);
    let min_dominant_share = shares.reduce(f64::min);
    Ok(GroupComposition { dominant, blocks, max_dominant_share, min_dominant_share })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn network(users: &[&str]) -> TopicNetwork {
        TopicNetwork::from_named_edges(
            Topic::RussiaUkraine,
            "2024-12:2025-05".parse().unwrap(),
            crate::graph::Interaction::Reposts,
            [],
            users.iter().copied(),
        )
    }

    fn label(user: &str, stance: Stance) -> StanceLabel {
        StanceLabel { user: user.into(), topic: Topic::RussiaUkraine, stance }
    }

    fn partition(assignment: Vec<u32>) -> Partition {
        let blocks = assignment.iter().max().map_or(0, |&b| b as usize + 1);
        Partition { assignment, blocks, dl: 0.0 }
    }

    #[test]
    fn coverage() {
        let g = network(&["a", "b", "c", "d"]);
        let all = [
            label("a", Stance::For),
            label("b", Stance::For),
            label("c", Stance::Against),
            label("d", Stance::Neutral),
        ];
        assert_eq!(content_groups(&all, &g).unwrap().coverage, 1.0);
        let s = content_groups(&all[..3], &g).unwrap();
        assert_eq!(s.coverage, 0.75);
        assert_eq!(s.unlabeled, 1);
        assert_eq!(s.counts(), [2, 0, 1]);
        let other_topic = StanceLabel { user: "d".into(), topic: Topic::Ai, stance: Stance::For };
        assert_eq!(content_groups(&[other_topic], &g).unwrap().unlabeled, 4);
    }

    #[test]
    fn single_uniform_block() {
        let g = network(&["a", "b"]);
        let s = content_groups(&[label("a", Stance::For), label("b", Stance::For)], &g).unwrap();
        let c = group_composition(&partition(vec![0, 0]), &s).unwrap();
        assert_eq!(c.max_dominant_share, Some(1.0));
        assert_eq!(c.dominant, Some(Stance::For));
    }

    #[test]
    fn thirds_and_unlabelled_bin() {
        let g = network(&["a", "b", "c", "d", "e", "f", "g"]);
        let labels = [
            label("a", Stance::For),
            label("b", Stance::Neutral),
            label("c", Stance::Against),
            label("e", Stance::For),
            label("f", Stance::For),
            label("g", Stance::For),
        ];
        let s = content_groups(&labels, &g).unwrap();
        let c = group_composition(&partition(vec![0, 0, 0, 0, 1, 1, 1]), &s).unwrap();
        assert_eq!(c.blocks[0].unlabeled, 1);
        assert_eq!(c.blocks[0].histogram.iter().sum::<u64>() + c.blocks[0].unlabeled, c.blocks[0].size);
        assert!((c.min_dominant_share.unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.max_dominant_share, Some(1.0));
    }
}
