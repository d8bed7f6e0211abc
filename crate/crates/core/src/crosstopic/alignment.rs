use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotate::Stance;
use crate::graph::TopicNetwork;
use crate::groups::{Partition, StanceGrouping};
use crate::{Error, Result};

/// User id to class label.
pub type Grouping = BTreeMap<String, u32>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NmiNormalization {
    /// `2I / (H_x + H_y)`.
    #[default]
    Arithmetic,
    /// `I / sqrt(H_x H_y)`.
    Geometric,
    /// `I / min(H_x, H_y)`.
    Min,
    /// `I / max(H_x, H_y)`.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupingSource {
    Content,
    Structural,
}

fn entropy(counts: impl Iterator<Item = u64>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// NMI of two labelings of the same items. `None` for fewer than two items,
/// zero when either labeling has zero entropy.
pub fn nmi(x: &[u32], y: &[u32], norm: NmiNormalization) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "labelings must cover the same items");
    if x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    // Ordered maps keep the floating-point sums reproducible.
    let mut cx: BTreeMap<u32, u64> = BTreeMap::new();
    let mut cy: BTreeMap<u32, u64> = BTreeMap::new();
    let mut cxy: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for (&a, &b) in x.iter().zip(y) {
        *cx.entry(a).or_default() += 1;
        *cy.entry(b).or_default() += 1;
        *cxy.entry((a, b)).or_default() += 1;
    }
    let hx = entropy(cx.values().copied(), n);
    let hy = entropy(cy.values().copied(), n);
    if hx <= 0.0 || hy <= 0.0 {
        return Some(0.0);
    }
    // I = Σ p(a,b) ln(p(a,b) / p(a)p(b)) = Σ (c/n) ln(c n / (c_a c_b)).
    let mi: f64 =
        cxy.iter().map(|(&(a, b), &c)| c as f64 / n * (c as f64 * n / (cx[&a] as f64 * cy[&b] as f64)).ln()).sum();
    let v = match norm {
        NmiNormalization::Arithmetic => 2.0 * mi / (hx + hy),
        NmiNormalization::Geometric => mi / (hx * hy).sqrt(),
        NmiNormalization::Min => mi / hx.min(hy),
        NmiNormalization::Max => mi / hx.max(hy),
    };
    Some(v.clamp(0.0, 1.0))
}

/// NMI over the users present in both groupings.
pub fn nmi_alignment(gx: &Grouping, gy: &Grouping, norm: NmiNormalization) -> Option<f64> {
    let (x, y): (Vec<u32>, Vec<u32>) = gx.iter().filter_map(|(u, &a)| gy.get(u).map(|&b| (a, b))).unzip();
    nmi(&x, &y, norm)
}

/// Stance classes of labelled network users: for 0, neutral 1, against 2.
/// Neutral users are dropped unless `include_neutral`.
pub fn grouping_from_stances(g: &TopicNetwork, s: &StanceGrouping, include_neutral: bool) -> Grouping {
    g.nodes
        .iter()
        .zip(&s.assignment)
        .filter_map(|(u, st)| match st {
            Some(Stance::Neutral) if !include_neutral => None,
            Some(st) => Some((u.clone(), st.index() as u32)),
            None => None,
        })
        .collect()
}

pub fn grouping_from_partition(g: &TopicNetwork, p: &Partition) -> Grouping {
    g.nodes.iter().cloned().zip(p.assignment.iter().copied()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentMatrix {
    pub labels: Vec<String>,
    pub source: GroupingSource,
    pub normalization: NmiNormalization,
    pub values: Vec<Vec<Option<f64>>>,
}

impl AlignmentMatrix {
    pub fn to_csv(&self) -> String {
        super::matrix_csv(&self.labels, &self.values)
    }
}

pub fn alignment_matrix(
    labels: Vec<String>,
    groupings: &[Grouping],
    source: GroupingSource,
    norm: NmiNormalization,
) -> Result<AlignmentMatrix> {
    let n = groupings.len();
    if labels.len() != n {
        return Err(Error::InvalidArgument(format!("{} labels for {n} groupings", labels.len())));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let scores: Vec<Option<f64>> =
        pairs.par_iter().map(|&(i, j)| nmi_alignment(&groupings[i], &groupings[j], norm)).collect();
    let mut values = vec![vec![None; n]; n];
    for (&(i, j), v) in pairs.iter().zip(scores) {
        values[i][j] = v;
        values[j][i] = v;
    }
    Ok(AlignmentMatrix { labels, source, normalization: norm, values })
}
