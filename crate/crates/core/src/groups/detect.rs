use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dl::{constant_part, partition_part, rate_term, LnFactorial};
use super::{description_length, Multigraph};
use crate::graph::TopicNetwork;
use crate::rng::{derive_seed, rng_from_seed, Rng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectOptions {
    pub max_groups: usize,
    pub runs: usize,
    /// Sweeps per run.
    pub iters: usize,
    pub seed: u64,
    /// Collapse parallel edges before fitting.
    pub simple_graph: bool,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self { max_groups: 5, runs: 15, iters: 50, seed: 0, simple_graph: false }
    }
}

/// Block assignment with its description length. Block ids are canonical:
/// numbered in order of first appearance over nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: Vec<u32>,
    pub blocks: usize,
    pub dl: f64,
}

impl Partition {
    pub fn new(g: &Multigraph, assignment: &[u32]) -> Result<Self> {
        let assignment = canonical_labels(assignment);
        let dl = description_length(g, &assignment)?;
        let blocks = assignment.iter().max().map_or(0, |&b| b as usize + 1);
        Ok(Self { assignment, blocks, dl })
    }

    pub fn sizes(&self) -> Vec<u64> {
        let mut s = vec![0u64; self.blocks];
        for &b in &self.assignment {
            s[b as usize] += 1;
        }
        s
    }
}

/// Relabels blocks in order of first appearance.
pub fn canonical_labels(assignment: &[u32]) -> Vec<u32> {
    let mut map = std::collections::HashMap::new();
    assignment
        .iter()
        .map(|b| {
            let next = map.len() as u32;
            *map.entry(*b).or_insert(next)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub run: usize,
    pub seed: u64,
    pub iterations: usize,
    /// Description length after each sweep.
    pub trajectory: Vec<f64>,
    pub dl: f64,
    pub blocks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralGroups {
    pub partition: Partition,
    pub single_block_dl: f64,
    pub options: DetectOptions,
    pub runs: Vec<RunDiagnostics>,
}

fn tolerance(x: f64) -> f64 {
    1e-9 * x.abs().max(1.0)
}

#[derive(Debug, Clone, Copy)]
enum Mode {
    Modularity,
    Greedy,
    /// Metropolis moves on the DL at the given temperature (nats).
    Anneal(f64),
}

/// Starting temperature of annealed runs, in nats.
const ANNEAL_START: f64 = 1.0;

#[derive(Clone)]
struct State<'g> {
    g: &'g Multigraph,
    lnf: &'g LnFactorial,
    constant: f64,
    m: u64,
    m2: u128,
    assign: Vec<u32>,
    size: Vec<u64>,
    kout: Vec<u64>,
    kin: Vec<u64>,
    m_in: u64,
    s_in: u128,
    fit: f64,
    /// Edges between the current node and each block, both directions.
    cnt: Vec<u64>,
}

impl<'g> State<'g> {
    fn new(g: &'g Multigraph, lnf: &'g LnFactorial, constant: f64, k: usize, assign: Vec<u32>) -> Self {
        let m = g.edge_count();
        let mut s = Self {
            g,
            lnf,
            constant,
            m,
            m2: m as u128 * m as u128,
            assign,
            size: vec![0; k],
            kout: vec![0; k],
            kin: vec![0; k],
            m_in: g.self_loops(),
            s_in: 0,
            fit: 0.0,
            cnt: vec![0; k],
        };
        for i in 0..g.node_count() {
            let r = s.assign[i] as usize;
            s.size[r] += 1;
            s.kout[r] += g.out_degree(i);
            s.kin[r] += g.in_degree(i);
            s.m_in += g
                .out_neighbors(i)
                .iter()
                .filter(|(j, _)| s.assign[*j as usize] as usize == r)
                .map(|(_, c)| c)
                .sum::<u64>();
        }
        s.s_in = (0..k).map(|r| s.kout[r] as u128 * s.kin[r] as u128).sum();
        s.fit = s.fit_of(s.m_in, s.s_in);
        s
    }

    fn fit_of(&self, m_in: u64, s_in: u128) -> f64 {
        rate_term(m_in, s_in) + rate_term(self.m - m_in, self.m2 - s_in)
    }

    fn dl(&self) -> f64 {
        self.constant
            + partition_part(self.m, self.m_in, self.s_in, self.size.iter().copied().filter(|&s| s > 0), self.lnf)
    }

    fn load_counts(&mut self, i: usize) {
        self.cnt.fill(0);
        for &(j, c) in self.g.out_neighbors(i).iter().chain(self.g.in_neighbors(i)) {
            self.cnt[self.assign[j as usize] as usize] += c;
        }
    }

    fn s_in_after(&self, i: usize, r: usize, s: usize) -> u128 {
        let (a, b) = (self.g.out_degree(i), self.g.in_degree(i));
        self.s_in + (self.kout[s] + a) as u128 * (self.kin[s] + b) as u128 - self.kout[s] as u128 * self.kin[s] as u128
            + (self.kout[r] - a) as u128 * (self.kin[r] - b) as u128
            - self.kout[r] as u128 * self.kin[r] as u128
    }

    /// Change in DL from moving `i` from `r` to `s`; needs `load_counts(i)`.
    fn delta_dl(&self, i: usize, r: usize, s: usize) -> f64 {
        let m_in = self.m_in + self.cnt[s] - self.cnt[r];
        let fit = self.fit_of(m_in, self.s_in_after(i, r, s));
        -(fit - self.fit) + (self.size[r] as f64).ln() - ((self.size[s] + 1) as f64).ln()
    }

    /// Modularity gain (times M) from moving `i` from `r` to `s`.
    fn delta_modularity(&self, i: usize, r: usize, s: usize) -> f64 {
        let (a, b) = (self.g.out_degree(i), self.g.in_degree(i));
        let m = self.m as f64;
        let into = self.cnt[s] as f64 - (a * self.kin[s] + b * self.kout[s]) as f64 / m;
        let stay = self.cnt[r] as f64 - (a * (self.kin[r] - b) + b * (self.kout[r] - a)) as f64 / m;
        into - stay
    }

    fn apply(&mut self, i: usize, s: usize) {
        let r = self.assign[i] as usize;
        let (a, b) = (self.g.out_degree(i), self.g.in_degree(i));
        self.s_in = self.s_in_after(i, r, s);
        self.m_in = self.m_in + self.cnt[s] - self.cnt[r];
        self.size[r] -= 1;
        self.size[s] += 1;
        self.kout[r] -= a;
        self.kin[r] -= b;
        self.kout[s] += a;
        self.kin[s] += b;
        self.assign[i] = s as u32;
        self.fit = self.fit_of(self.m_in, self.s_in);
    }

    /// One pass of single-node moves over `order`. With `pair`, only moves
    /// between the two given blocks are considered. Returns the move count.
    fn sweep(&mut self, order: &[u32], pair: Option<(usize, usize)>, mode: Mode, rng: &mut Rng) -> usize {
        let k = self.size.len();
        let mut moves = 0;
        for &i in order {
            let i = i as usize;
            let r = self.assign[i] as usize;
            let candidates: Vec<usize> = match pair {
                Some((p, q)) if r == p => vec![q],
                Some((p, q)) if r == q => vec![p],
                Some(_) => continue,
                None => (0..k).filter(|&s| s != r).collect(),
            };
            if candidates.is_empty() {
                continue;
            }
            self.load_counts(i);
            let target = match mode {
                Mode::Modularity => {
                    let (gain, s) = candidates
                        .iter()
                        .map(|&s| (self.delta_modularity(i, r, s), s))
                        .fold((f64::NEG_INFINITY, r), |b, c| if c.0 > b.0 { c } else { b });
                    (gain > 1e-12).then_some(s)
                }
                Mode::Greedy => {
                    let (delta, s) = candidates
                        .iter()
                        .map(|&s| (self.delta_dl(i, r, s), s))
                        .fold((f64::INFINITY, r), |b, c| if c.0 < b.0 { c } else { b });
                    (delta < -tolerance(self.fit)).then_some(s)
                }
                Mode::Anneal(t) => {
                    let s = candidates[rng.gen_range(0..candidates.len())];
                    let delta = self.delta_dl(i, r, s);
                    (delta < 0.0 || rng.gen::<f64>() < (-delta / t).exp()).then_some(s)
                }
            };
            if let Some(s) = target {
                self.apply(i, s);
                moves += 1;
            }
        }
        moves
    }

    /// Greedily merges block pairs while that lowers the DL.
    fn merge_pass(&mut self) -> bool {
        let k = self.size.len();
        let mut e = vec![0u64; k * k];
        for i in 0..self.g.node_count() {
            let r = self.assign[i] as usize;
            for &(j, c) in self.g.out_neighbors(i) {
                e[r * k + self.assign[j as usize] as usize] += c;
            }
        }
        let mut changed = false;
        loop {
            let mut best: Option<(f64, usize, usize)> = None;
            for a in (0..k).filter(|&a| self.size[a] > 0) {
                for b in (a + 1..k).filter(|&b| self.size[b] > 0) {
                    let m_in = self.m_in + e[a * k + b] + e[b * k + a];
                    let s_in = self.s_in
                        + self.kout[a] as u128 * self.kin[b] as u128
                        + self.kout[b] as u128 * self.kin[a] as u128;
                    let delta =
                        -(self.fit_of(m_in, s_in) - self.fit) + self.lnf.get(self.size[a]) + self.lnf.get(self.size[b])
                            - self.lnf.get(self.size[a] + self.size[b]);
                    if best.map_or(true, |(d, _, _)| delta < d) {
                        best = Some((delta, a, b));
                    }
                }
            }
            let Some((delta, a, b)) = best else { break };
            if delta >= -tolerance(self.fit) {
                break;
            }
            self.m_in += e[a * k + b] + e[b * k + a];
            self.s_in += self.kout[a] as u128 * self.kin[b] as u128 + self.kout[b] as u128 * self.kin[a] as u128;
            for x in self.assign.iter_mut().filter(|x| **x as usize == b) {
                *x = a as u32;
            }
            self.size[a] += std::mem::take(&mut self.size[b]);
            self.kout[a] += std::mem::take(&mut self.kout[b]);
            self.kin[a] += std::mem::take(&mut self.kin[b]);
            for t in 0..k {
                e[a * k + t] += std::mem::take(&mut e[b * k + t]);
            }
            for t in 0..k {
                e[t * k + a] += std::mem::take(&mut e[t * k + b]);
            }
            self.fit = self.fit_of(self.m_in, self.s_in);
            changed = true;
        }
        changed
    }

    /// Tries to split each block into an empty slot: random bisection,
    /// then restricted modularity and DL sweeps. Keeps splits that lower the DL.
    fn split_pass(&mut self, rng: &mut Rng) -> bool {
        let k = self.size.len();
        let mut changed = false;
        for r in 0..k {
            if self.size[r] < 2 {
                continue;
            }
            let Some(e) = (0..k).find(|&s| self.size[s] == 0) else { break };
            let before = self.dl();
            let saved = self.clone();
            let mut members: Vec<u32> =
                (0..self.assign.len() as u32).filter(|&i| self.assign[i as usize] as usize == r).collect();
            for &i in &members {
                if rng.gen_bool(0.5) {
                    self.load_counts(i as usize);
                    self.apply(i as usize, e);
                }
            }
            for pass in 0..5 {
                members.shuffle(rng);
                let mode = if pass < 2 { Mode::Modularity } else { Mode::Greedy };
                self.sweep(&members, Some((r, e)), mode, rng);
            }
            if self.size[r] > 0 && self.size[e] > 0 && self.dl() < before - tolerance(before) {
                changed = true;
            } else {
                *self = saved;
            }
        }
        changed
    }
}

struct RunOutcome {
    assignment: Vec<u32>,
    dl: f64,
    diagnostics: RunDiagnostics,
}

fn run_once(g: &Multigraph, lnf: &LnFactorial, constant: f64, opts: &DetectOptions, run: usize) -> RunOutcome {
    let seed = derive_seed(opts.seed, &format!("run-{run}"));
    let mut rng = rng_from_seed(seed);
    let k = opts.max_groups;
    let n = g.node_count();
    let assign = (0..n).map(|_| rng.gen_range(0..k) as u32).collect();
    let mut state = State::new(g, lnf, constant, k, assign);
    let mut order: Vec<u32> = (0..n as u32).collect();
    // Even runs start with modularity sweeps, which find assortative
    // structure from a random start. Odd runs anneal the DL directly over
    // their first half, which also reaches disassortative optima.
    let warm = if run % 2 == 0 && opts.iters >= 2 { (opts.iters / 10).max(1) } else { 0 };
    let anneal = if run % 2 == 1 { opts.iters / 2 } else { 0 };
    let mut trajectory = Vec::with_capacity(opts.iters);
    let mut best = state.clone();
    let mut it = 0;
    while it < opts.iters {
        order.shuffle(&mut rng);
        let mode = if it < warm {
            Mode::Modularity
        } else if it < anneal {
            Mode::Anneal(ANNEAL_START * (1.0 - it as f64 / anneal as f64))
        } else {
            Mode::Greedy
        };
        let moves = state.sweep(&order, None, mode, &mut rng);
        it += 1;
        let settled = it > warm && it > anneal;
        let mut changed = moves > 0;
        let stalled = settled && moves == 0;
        if settled && (it % 10 == 0 || stalled) {
            changed |= state.merge_pass();
            changed |= state.split_pass(&mut rng);
        }
        let dl = state.dl();
        trajectory.push(dl);
        if dl < best.dl() - tolerance(dl) {
            best = state.clone();
        }
        if stalled && !changed {
            break;
        }
    }
    // Annealing may have passed through a better state than where it ended.
    if best.dl() < state.dl() - tolerance(best.dl()) {
        state = best;
        order.shuffle(&mut rng);
        while state.sweep(&order, None, Mode::Greedy, &mut rng) > 0 {}
    }
    state.merge_pass();
    let assignment = canonical_labels(&state.assign);
    let dl = state.dl();
    let blocks = assignment.iter().max().map_or(0, |&b| b as usize + 1);
    RunOutcome { diagnostics: RunDiagnostics { run, seed, iterations: it, trajectory, dl, blocks }, assignment, dl }
}

/// `a` beats `b`: lower DL, or equal DL and lexicographically smaller labels.
fn better(a: (&[u32], f64), b: (&[u32], f64)) -> bool {
    let tol = tolerance(a.1.max(b.1));
    if a.1 < b.1 - tol {
        true
    } else if a.1 > b.1 + tol {
        false
    } else {
        a.0 < b.0
    }
}

/// Minimum-DL partition over independent runs and the single-block partition.
pub fn detect_on(g: &Multigraph, opts: &DetectOptions) -> Result<StructuralGroups> {
    let n = g.node_count();
    if n == 0 || g.edge_count() == 0 {
        return Err(Error::InvalidArgument("graph has no nodes or no edges".into()));
    }
    if opts.max_groups == 0 || opts.runs == 0 {
        return Err(Error::InvalidArgument("max_groups and runs must be positive".into()));
    }
    let lnf = LnFactorial::new(n);
    let constant = constant_part(g, &lnf);
    let m = g.edge_count();
    let single = vec![0u32; n];
    let single_block_dl = constant + partition_part(m, m, m as u128 * m as u128, std::iter::once(n as u64), &lnf);

    let outcomes: Vec<RunOutcome> = if opts.max_groups == 1 {
        Vec::new()
    } else {
        (0..opts.runs).into_par_iter().map(|r| run_once(g, &lnf, constant, opts, r)).collect()
    };

    let mut best: (&[u32], f64) = (&single, single_block_dl);
    for o in &outcomes {
        if better((&o.assignment, o.dl), best) {
            best = (&o.assignment, o.dl);
        }
    }
    let partition = Partition::new(g, best.0)?;
    Ok(StructuralGroups {
        partition,
        single_block_dl,
        options: *opts,
        runs: outcomes.into_iter().map(|o| o.diagnostics).collect(),
    })
}

pub fn detect_structural_groups(g: &TopicNetwork, opts: &DetectOptions) -> Result<StructuralGroups> {
    detect_on(&Multigraph::from_network(g, opts.simple_graph), opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cliques(sizes: &[u32]) -> Multigraph {
        let mut e = Vec::new();
        let mut base = 0;
        for &s in sizes {
            for a in 0..s {
                for b in 0..s {
                    if a != b {
                        e.push((base + a, base + b));
                    }
                }
            }
            base += s;
        }
        Multigraph::new(base as usize, &e).unwrap()
    }

    #[test]
    fn two_cliques_give_two_blocks() {
        let g = cliques(&[6, 6]);
        let r = detect_on(&g, &DetectOptions { seed: 3, ..Default::default() }).unwrap();
        assert_eq!(r.partition.assignment, vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1]);
        assert!(r.partition.dl < r.single_block_dl);
    }

    #[test]
    fn incremental_dl_matches_direct() {
        let g = cliques(&[4, 5, 3]);
        let lnf = LnFactorial::new(g.node_count());
        let c = constant_part(&g, &lnf);
        let mut rng = rng_from_seed(9);
        let assign: Vec<u32> = (0..12).map(|_| rng.gen_range(0..4)).collect();
        let mut s = State::new(&g, &lnf, c, 4, assign);
        for step in 0..200 {
            let i = rng.gen_range(0..12);
            let to = rng.gen_range(0..4);
            let r = s.assign[i] as usize;
            if r == to {
                continue;
            }
            s.load_counts(i);
            let predicted = s.dl() + s.delta_dl(i, r, to);
            s.apply(i, to);
            let direct = description_length(&g, &s.assign).unwrap();
            assert!((s.dl() - direct).abs() < 1e-9, "step {step}");
            assert!((predicted - direct).abs() < 1e-9, "step {step}");
        }
        s.merge_pass();
        assert!((s.dl() - description_length(&g, &s.assign).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn reproducible_and_monotone() {
        let g = cliques(&[5, 5, 5]);
        let o = DetectOptions { seed: 11, runs: 4, ..Default::default() };
        let a = detect_on(&g, &o).unwrap();
        assert_eq!(a, detect_on(&g, &o).unwrap());
        for r in &a.runs {
            assert!(a.partition.dl <= r.dl + 1e-9);
        }
        assert!(a.partition.dl <= a.single_block_dl + 1e-9);
    }

    #[test]
    fn empty_graph_is_rejected() {
        let g = Multigraph::new(0, &[]).unwrap();
        assert!(detect_on(&g, &DetectOptions::default()).is_err());
    }
}
