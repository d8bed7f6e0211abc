//! Description length of a planted-partition degree-corrected block model.
//!
//! For a directed multigraph with `M` edges, out/in degrees `k⁺, k⁻` and a
//! partition into `B` non-empty blocks with degree sums `κ⁺_r, κ⁻_r`:
//!
//! ```text
//! S_in  = Σ_r κ⁺_r κ⁻_r          S_out = M² − S_in
//! LL    = Σ_i k⁺_i ln k⁺_i + Σ_i k⁻_i ln k⁻_i
//!       + m_in ln(m_in / S_in) + m_out ln(m_out / S_out) − M − Σ_ij ln A_ij!
//! DL    = −LL + ln(N! / Π_r n_r!) + ln N
//! ```
//!
//! `m_in` counts edges (self-loops included) whose endpoints share a block,
//! `m_out = M − m_in`, and `0 ln 0 = 0`.

use std::collections::HashMap;

use super::Multigraph;
use crate::{Error, Result};

/// `ln k!` for `k ≤ n`.
#[derive(Debug, Clone)]
pub(crate) struct LnFactorial(Vec<f64>);

impl LnFactorial {
    pub fn new(n: usize) -> Self {
        let mut t = Vec::with_capacity(n + 1);
        t.push(0.0);
        let mut acc = 0.0;
        for k in 1..=n {
            acc += (k as f64).ln();
            t.push(acc);
        }
        Self(t)
    }

    pub fn get(&self, k: u64) -> f64 {
        self.0[k as usize]
    }
}

fn xlnx(x: u64) -> f64 {
    if x == 0 {
        0.0
    } else {
        x as f64 * (x as f64).ln()
    }
}

/// `m ln(m / s)`, zero when `m = 0`.
pub(crate) fn rate_term(m: u64, s: u128) -> f64 {
    if m == 0 {
        0.0
    } else {
        m as f64 * (m as f64 / s as f64).ln()
    }
}

/// Partition-independent part of the description length:
/// `−Σ k ln k + M + Σ ln A! + ln N! + ln N`.
pub(crate) fn constant_part(g: &Multigraph, lnf: &LnFactorial) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    let degrees: f64 = (0..n).map(|i| xlnx(g.out_degree(i)) + xlnx(g.in_degree(i))).sum();
    -degrees + g.edge_count() as f64 + g.ln_multiplicity_factorials() + lnf.get(n as u64) + (n as f64).ln()
}

/// Partition-dependent part from block aggregates.
pub(crate) fn partition_part(
    m: u64,
    m_in: u64,
    s_in: u128,
    sizes: impl Iterator<Item = u64>,
    lnf: &LnFactorial,
) -> f64 {
    let s_out = (m as u128) * (m as u128) - s_in;
    let fit = rate_term(m_in, s_in) + rate_term(m - m_in, s_out);
    -fit - sizes.map(|s| lnf.get(s)).sum::<f64>()
}

/// Description length in nats. Block ids are arbitrary labels.
pub fn description_length(g: &Multigraph, assignment: &[u32]) -> Result<f64> {
    let n = g.node_count();
    if assignment.len() != n {
        return Err(Error::InvalidArgument(format!("partition covers {} nodes, graph has {n}", assignment.len())));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let mut index: HashMap<u32, usize> = HashMap::new();
    let mut compact = Vec::with_capacity(n);
    for &b in assignment {
        let next = index.len();
        compact.push(*index.entry(b).or_insert(next));
    }
    let blocks = index.len();
    let mut sizes = vec![0u64; blocks];
    let mut kout = vec![0u64; blocks];
    let mut kin = vec![0u64; blocks];
    let mut m_in = g.self_loops();
    for i in 0..n {
        let r = compact[i];
        sizes[r] += 1;
        kout[r] += g.out_degree(i);
        kin[r] += g.in_degree(i);
        m_in += g.out_neighbors(i).iter().filter(|(j, _)| compact[*j as usize] == r).map(|(_, c)| c).sum::<u64>();
    }
    let s_in: u128 = kout.iter().zip(&kin).map(|(&a, &b)| a as u128 * b as u128).sum();
    let lnf = LnFactorial::new(n);
    Ok(constant_part(g, &lnf) + partition_part(g.edge_count(), m_in, s_in, sizes.into_iter(), &lnf))
}
