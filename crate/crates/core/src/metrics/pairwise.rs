use serde::{Deserialize, Serialize};

use super::{aei, GroupedGraphView};
use crate::Result;

/// AEI for every pair of groups. The matrix is symmetric with an absent
/// diagonal; summaries run over the defined off-diagonal pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseAei {
    pub names: Vec<String>,
    pub matrix: Vec<Vec<Option<f64>>>,
    pub mean: Option<f64>,
    pub max: Option<f64>,
    pub min: Option<f64>,
}

impl PairwiseAei {
    /// CSV with a header row of group names; absent cells are `--`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("group");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (name, row) in self.names.iter().zip(&self.matrix) {
            out.push_str(name);
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
}

pub fn pairwise_aei(view: &GroupedGraphView) -> Result<PairwiseAei> {
    let k = view.group_count();
    if k < 2 {
        return Ok(PairwiseAei { names: view.names().to_vec(), matrix: Vec::new(), mean: None, max: None, min: None });
    }
    let mut matrix = vec![vec![None; k]; k];
    let mut values = Vec::new();
    for x in 0..k {
        for y in x + 1..k {
            let v = aei(view, x, y)?;
            matrix[x][y] = v;
            matrix[y][x] = v;
            values.extend(v);
        }
    }
    let mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
    let max = values.iter().copied().reduce(f64::max);
    let min = values.iter().copied().reduce(f64::min);
    Ok(PairwiseAei { names: view.names().to_vec(), matrix, mean, max, min })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_groups_reduce_to_single_value() {
        let labels = [Some(0), Some(0), Some(1), Some(1)];
        let v = GroupedGraphView::new(vec!["A".into(), "B".into()], &labels, [(0, 1), (2, 3), (0, 2)]).unwrap();
        let p = pairwise_aei(&v).unwrap();
        let single = aei(&v, 0, 1).unwrap();
        assert_eq!(p.mean, single);
        assert_eq!(p.max, single);
        assert_eq!(p.min, single);
        assert_eq!(p.matrix[0][0], None);
    }

    #[test]
    fn one_group_is_empty() {
        let v = GroupedGraphView::new(vec!["A".into()], &[Some(0), Some(0)], [(0, 1)]).unwrap();
        let p = pairwise_aei(&v).unwrap();
        assert!(p.matrix.is_empty() && p.mean.is_none());
    }

    #[test]
    fn disconnected_and_merged_groups() {
        // r = {0..4} clique; s = {5..9} and t = {10..14} wired as one clique.
        let mut e = Vec::new();
        for a in 0..5u32 {
            for b in 0..5u32 {
                if a != b {
                    e.push((a, b));
                }
            }
        }
        for a in 5..15u32 {
            for b in 5..15u32 {
                if a != b {
                    e.push((a, b));
                }
            }
        }
        let labels: Vec<Option<u32>> = (0..15).map(|i| Some(i / 5)).collect();
        let v = GroupedGraphView::new(vec!["r".into(), "s".into(), "t".into()], &labels, e).unwrap();
        let p = pairwise_aei(&v).unwrap();
        assert_eq!(p.matrix[0][1], Some(1.0));
        assert!(p.matrix[1][2].unwrap().abs() < 1e-12);
        assert_eq!(p.matrix[1][2], p.matrix[2][1]);
        assert!(p.to_csv().starts_with("group,r,s,t\nr,--,1.000000,"));
    }
}
