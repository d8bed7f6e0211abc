use super::GroupedGraphView;
use crate::{Error, Result};

/// Adaptive EI between groups `x` and `y` from pooled directed densities:
///
/// ```text
/// d_int = (m_xx + m_yy) / (n_x(n_x−1) + n_y(n_y−1))
/// d_ext = (m_xy + m_yx) / (2 n_x n_y)
/// AEI   = (d_int − d_ext) / (d_int + d_ext)
/// ```
///
/// `d_int` is zero when both groups are singletons. `None` when there are
/// no edges between scored nodes of the two groups.
pub fn aei(view: &GroupedGraphView, x: usize, y: usize) -> Result<Option<f64>> {
    view.check_group(x)?;
    view.check_group(y)?;
    if x == y {
        return Err(Error::InvalidArgument("aei needs two distinct groups".into()));
    }
    let (nx, ny) = (view.size(x) as f64, view.size(y) as f64);
    let internal = (view.mixing(x, x) + view.mixing(y, y)) as f64;
    let external = (view.mixing(x, y) + view.mixing(y, x)) as f64;
    let int_pairs = nx * (nx - 1.0) + ny * (ny - 1.0);
    let d_int = if int_pairs > 0.0 { internal / int_pairs } else { 0.0 };
    let d_ext = external / (2.0 * nx * ny);
    let total = d_int + d_ext;
    Ok((total > 0.0).then(|| (d_int - d_ext) / total))
}

/// Categorical assortativity of the directed mixing matrix. `None` without
/// edges or when all edge mass sits in one group.
pub fn assortativity(view: &GroupedGraphView) -> Option<f64> {
    let total = view.edge_total();
    if total == 0 {
        return None;
    }
    let k = view.group_count();
    let t = total as f64;
    let mut trace = 0.0;
    let mut ab = 0.0;
    for g in 0..k {
        trace += view.mixing(g, g) as f64 / t;
        let a: u64 = (0..k).map(|h| view.mixing(g, h)).sum();
        let b: u64 = (0..k).map(|h| view.mixing(h, g)).sum();
        ab += (a as f64 / t) * (b as f64 / t);
    }
    let denom = 1.0 - ab;
    (denom > 0.0).then(|| (trace - ab) / denom)
}

/// Coleman homophily of group `g`. With `w` the share of the group's
/// out-edges that stay inside and baseline `p = (n_g − 1)/(N − 1)`, it is
/// `(w − p)/(1 − p)` when `w ≥ p`, else `(w − p)/p`. `None` when the group
/// has no out-edges or spans every scored node.
pub fn coleman(view: &GroupedGraphView, g: usize) -> Result<Option<f64>> {
    view.check_group(g)?;
    let out: u64 = (0..view.group_count()).map(|h| view.mixing(g, h)).sum();
    let n = view.scored_nodes();
    let ng = view.size(g);
    if out == 0 || ng == n {
        return Ok(None);
    }
    let w = view.mixing(g, g) as f64 / out as f64;
    let p = (ng - 1) as f64 / (n - 1) as f64;
    Ok(Some(if w >= p { (w - p) / (1.0 - p) } else { (w - p) / p }))
}

/// Allowed gap between 1 and the sum of `[A, neutral, B]` fractions; three
/// values each rounded to two decimals can be off by 0.015.
pub const FRACTION_SUM_TOLERANCE: f64 = 0.015;

fn check_fractions(f: [f64; 3]) -> Result<()> {
    if f.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::InvalidArgument(format!("fractions {f:?} outside [0, 1]")));
    }
    let sum: f64 = f.iter().sum();
    if (sum - 1.0).abs() > FRACTION_SUM_TOLERANCE {
        return Err(Error::InvalidArgument(format!("fractions {f:?} sum to {sum}")));
    }
    Ok(())
}

/// Simpson diversity of the two opposing groups in `[A, neutral, B]`,
/// renormalized over `A + B`. `None` when `A + B = 0`.
pub fn simpson(fractions: [f64; 3]) -> Result<Option<f64>> {
    check_fractions(fractions)?;
    let (a, b) = (fractions[0], fractions[2]);
    if a + b == 0.0 {
        return Ok(None);
    }
    let (p, q) = (a / (a + b), b / (a + b));
    Ok(Some(1.0 - (p * p + q * q)))
}

/// Simpson diversity over all three stance groups, `1 − Σ f²`.
pub fn simpson_all_groups(fractions: [f64; 3]) -> Result<f64> {
    check_fractions(fractions)?;
    let sum: f64 = fractions.iter().sum();
    Ok(1.0 - fractions.iter().map(|f| (f / sum) * (f / sum)).sum::<f64>())
}
