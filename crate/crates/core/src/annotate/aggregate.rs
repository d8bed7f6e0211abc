use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::labels::{Theme, ThemeLabel};
use crate::{Error, Result};

/// One row of the theme table. `share_of_political` is `None` for the
/// non-political row and when no post is political.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemeRow {
    pub theme: Theme,
    pub count: u64,
    pub share_of_total: f64,
    pub share_of_political: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemeDistribution {
    pub total: u64,
    pub political: u64,
    pub rows: Vec<ThemeRow>,
}

impl ThemeDistribution {
    /// Builds the table from per-theme counts. Missing themes count as zero.
    pub fn from_counts(counts: &BTreeMap<Theme, u64>) -> Result<Self> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(Error::Precondition("theme distribution of zero posts".into()));
        }
        let political: u64 = counts.iter().filter(|(t, _)| t.is_political()).map(|(_, c)| c).sum();
        let rows = Theme::ALL
            .iter()
            .map(|&theme| {
                let count = counts.get(&theme).copied().unwrap_or(0);
                ThemeRow {
                    theme,
                    count,
                    share_of_total: count as f64 / total as f64,
                    share_of_political: (theme.is_political() && political > 0)
                        .then(|| count as f64 / political as f64),
                }
            })
            .collect();
        Ok(Self { total, political, rows })
    }

    pub fn political_share(&self) -> f64 {
        self.political as f64 / self.total as f64
    }

    pub fn row(&self, theme: Theme) -> &ThemeRow {
        self.rows.iter().find(|r| r.theme == theme).expect("every theme has a row")
    }

    /// Political rows, empty when nothing is political.
    pub fn political_rows(&self) -> impl Iterator<Item = &ThemeRow> {
        self.rows.iter().filter(|r| r.share_of_political.is_some())
    }
}

pub fn theme_distribution(labels: &[ThemeLabel]) -> Result<ThemeDistribution> {
    let mut counts = BTreeMap::new();
    for l in labels {
        *counts.entry(l.theme).or_insert(0u64) += 1;
    }
    ThemeDistribution::from_counts(&counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub cluster_id: String,
    pub member_posts: Vec<String>,
    pub theme_histogram: BTreeMap<Theme, u64>,
    #[serde(default)]
    pub political: Option<bool>,
}

impl ClusterRecord {
    /// Builds a record from member theme labels.
    pub fn from_labels(cluster_id: impl Into<String>, labels: &[ThemeLabel]) -> Self {
        let mut theme_histogram = BTreeMap::new();
        for l in labels {
            *theme_histogram.entry(l.theme).or_insert(0) += 1;
        }
        Self {
            cluster_id: cluster_id.into(),
            member_posts: labels.iter().map(|l| l.post_uri.clone()).collect(),
            theme_histogram,
            political: None,
        }
    }
}

/// A cluster is apolitical when its non-political share reaches
/// `threshold` (inclusive). Returns the political flag.
pub fn classify_cluster(cluster: &ClusterRecord, threshold: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} outside [0, 1]")));
    }
    let total: u64 = cluster.theme_histogram.values().sum();
    if total == 0 {
        return Err(Error::InvalidArgument(format!("cluster {} is empty", cluster.cluster_id)));
    }
    if !cluster.member_posts.is_empty() && cluster.member_posts.len() as u64 != total {
        return Err(Error::InvalidArgument(format!(
            "cluster {}: histogram sums to {total} but has {} members",
            cluster.cluster_id,
            cluster.member_posts.len()
        )));
    }
    let non_political = cluster.theme_histogram.get(&Theme::NonPolitical).copied().unwrap_or(0);
    let share = non_political as f64 / total as f64;
    Ok(share < threshold)
}
