use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::graph::TopicNetwork;
use crate::{Error, Result};

/// Jaccard index of two sorted, deduplicated id lists. `None` when both are
/// empty.
pub fn jaccard(a: &[String], b: &[String]) -> Option<f64> {
    let (mut i, mut j, mut shared) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - shared;
    (union > 0).then(|| shared as f64 / union as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl OverlapMatrix {
    /// Validates a given matrix: square, symmetric, entries in `[0, 1]`.
    pub fn new(labels: Vec<String>, values: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let n = labels.len();
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument(format!("overlap matrix is not {n}x{n}")));
        }
        for i in 0..n {
            for j in 0..n {
                if values[i][j] != values[j][i] {
                    return Err(Error::InvalidArgument(format!("overlap matrix is asymmetric at ({i}, {j})")));
                }
                if values[i][j].is_some_and(|v| !(0.0..=1.0).contains(&v)) {
                    return Err(Error::InvalidArgument(format!("overlap ({i}, {j}) outside [0, 1]")));
                }
            }
        }
        Ok(Self { labels, values })
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i][j]
    }

    pub fn to_csv(&self) -> String {
        super::matrix_csv(&self.labels, &self.values)
    }
}

/// Pairwise Jaccard overlap of the networks' node sets, labelled by topic slug.
pub fn jaccard_matrix(networks: &[&TopicNetwork]) -> Result<OverlapMatrix> {
    if networks.len() < 2 {
        return Err(Error::InvalidArgument("overlap needs at least two networks".into()));
    }
    let n = networks.len();
    let mut values = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = jaccard(&networks[i].nodes, &networks[j].nodes);
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    let labels = networks.iter().map(|g| g.topic.slug().to_string()).collect();
    Ok(OverlapMatrix { labels, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn basic_values() {
        assert_eq!(jaccard(&ids(&["a", "b"]), &ids(&["a", "b"])), Some(1.0));
        assert_eq!(jaccard(&ids(&["a"]), &ids(&["b"])), Some(0.0));
        assert_eq!(jaccard(&ids(&["a", "b", "c"]), &ids(&["b", "c", "d"])), Some(0.5));
        assert_eq!(jaccard(&[], &[]), None);
    }

    #[test]
    fn rejects_bad_matrices() {
        let l = ids(&["x", "y"]);
        assert!(OverlapMatrix::new(l.clone(), vec![vec![Some(1.0), Some(0.3)], vec![Some(0.2), Some(1.0)]]).is_err());
        assert!(OverlapMatrix::new(l.clone(), vec![vec![Some(1.0)]]).is_err());
        assert!(OverlapMatrix::new(l, vec![vec![Some(1.0), Some(0.3)], vec![Some(0.3), Some(1.0)]]).is_ok());
    }
}
