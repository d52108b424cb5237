//! Monte Carlo pivotality: random shareholder orders decide who controls
//! each entity, and value is propagated up the drawn control links.
//!
//! Iteration `t` draws from its own ChaCha substream `(seed, t)`, and
//! iterations are summed in fixed blocks in index order, so estimates are
//! bit-identical for any thread count.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::numerics::{self, SolveOptions};
use crate::score::ScoreVector;

pub const DEFAULT_D: f64 = 0.5;
pub const DEFAULT_QUOTA: f64 = 0.5;
/// Residual bound for every per-iteration solve.
pub const DRAW_TOLERANCE: f64 = 1e-10;
const BLOCK: usize = 1024;
const QUOTA_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PivotRule {
    /// The shareholder whose arrival crosses the quota takes the link.
    #[default]
    ShapleyOrder,
    /// The link is split equally among the critical members of the
    /// winning prefix.
    JohnstonSplit,
}

impl std::str::FromStr for PivotRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shapley" | "shapley-order" => Ok(PivotRule::ShapleyOrder),
            "johnston" | "johnston-split" => Ok(PivotRule::JohnstonSplit),
            _ => Err(Error::param("pivot-rule", format!("expected `shapley` or `johnston`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub iterations: usize,
    pub d: f64,
    pub quota: f64,
    pub seed: u64,
    pub pivot_rule: PivotRule,
    /// Count each node's own value in its score.
    pub own_endowment: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            iterations: 1000,
            d: DEFAULT_D,
            quota: DEFAULT_QUOTA,
            seed: 0,
            pivot_rule: PivotRule::ShapleyOrder,
            own_endowment: true,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::param("iterations", "must be at least 1"));
        }
        if !(self.d > 0.0 && self.d < 1.0) {
            return Err(Error::param("d", format!("must lie in (0, 1), got {}", self.d)));
        }
        if !(self.quota > 0.0 && self.quota <= 1.0) {
            return Err(Error::param("quota", format!("must lie in (0, 1], got {}", self.quota)));
        }
        Ok(())
    }
}

/// RNG for iteration `t`.
pub fn iteration_rng(seed: u64, t: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t);
    rng
}

/// One realized control structure.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationDraw {
    /// `Y[i][j]`: weight of the link by which `i` controls `j`.
    pub y: DMatrix<f64>,
    /// Per entity, its pivots and their weights; empty when the quota is unreachable.
    pub pivots: Vec<Vec<(usize, f64)>>,
}

pub fn draw_control_structure(
    net: &Network,
    cfg: &SimulationConfig,
    rng: &mut ChaCha8Rng,
) -> Result<IterationDraw> {
    if !net.is_ownership() {
        return Err(Error::NotOwnershipNetwork);
    }
    let n = net.len();
    let mut y = DMatrix::zeros(n, n);
    let mut pivots = vec![Vec::new(); n];
    let mut order: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let holders = net.in_edges(j);
        if holders.is_empty() {
            continue;
        }
        order.clear();
        order.extend_from_slice(holders);
        order.shuffle(rng);
        let mut sum = 0.0;
        let Some(cross) = order.iter().position(|&(_, w)| {
            sum += w;
            sum + QUOTA_EPS >= cfg.quota
        }) else {
            continue;
        };
        let chosen: Vec<(usize, f64)> = match cfg.pivot_rule {
            PivotRule::ShapleyOrder => vec![(order[cross].0, 1.0)],
            PivotRule::JohnstonSplit => {
                let prefix = &order[..=cross];
                let critical: Vec<usize> = prefix
                    .iter()
                    .filter(|&&(_, w)| sum - w + QUOTA_EPS < cfg.quota)
                    .map(|&(i, _)| i)
                    .collect();
                let share = 1.0 / critical.len() as f64;
                critical.into_iter().map(|i| (i, share)).collect()
            }
        };
        for &(i, w) in &chosen {
            y[(i, j)] += w;
        }
        pivots[j] = chosen;
    }
    Ok(IterationDraw { y, pivots })
}

/// `(I − dY)⁻¹` for one draw.
fn propagator(draw: &IterationDraw, d: f64) -> Result<DMatrix<f64>> {
    let n = draw.y.nrows();
    let sys = DMatrix::identity(n, n) - &draw.y * d;
    let opts = SolveOptions { tolerance: DRAW_TOLERANCE, ..SolveOptions::default() };
    numerics::invert(&sys, &opts).map_err(|e| match e {
        Error::SingularMatrix(_) | Error::ResidualTooLarge(_) => Error::SingularDraw,
        other => other,
    })
}

#[derive(Clone)]
struct Tally {
    y: Vec<f64>,
    flow: DMatrix<f64>,
    pivot: DMatrix<f64>,
}

impl Tally {
    fn zero(n: usize) -> Self {
        Tally { y: vec![0.0; n], flow: DMatrix::zeros(n, n), pivot: DMatrix::zeros(n, n) }
    }

    fn add(&mut self, other: &Tally) {
        for (a, b) in self.y.iter_mut().zip(&other.y) {
            *a += b;
        }
        self.flow += &other.flow;
        self.pivot += &other.pivot;
    }
}

fn simulate(net: &Network, cfg: &SimulationConfig) -> Result<Tally> {
    cfg.validate()?;
    if !net.is_ownership() {
        return Err(Error::NotOwnershipNetwork);
    }
    let n = net.len();
    let v = net.values();
    let run_block = |b: usize| -> Result<Tally> {
        let mut tally = Tally::zero(n);
        let end = ((b + 1) * BLOCK).min(cfg.iterations);
        for t in b * BLOCK..end {
            let mut rng = iteration_rng(cfg.seed, t as u64);
            let draw = draw_control_structure(net, cfg, &mut rng)?;
            let m = propagator(&draw, cfg.d)?;
            for i in 0..n {
                let mut yi = 0.0;
                for j in 0..n {
                    let f = m[(i, j)] * v[j];
                    yi += f;
                    tally.flow[(i, j)] += f;
                }
                tally.y[i] += yi;
            }
            tally.pivot += &draw.y;
        }
        Ok(tally)
    };
    let blocks = cfg.iterations.div_ceil(BLOCK);
    let parts: Vec<Result<Tally>> = with_pool(|| (0..blocks).into_par_iter().map(run_block).collect());
    let mut total = Tally::zero(n);
    for part in parts {
        total.add(&part?);
    }
    let scale = 1.0 / cfg.iterations as f64;
    total.y.iter_mut().for_each(|x| *x *= scale);
    total.flow *= scale;
    total.pivot *= scale;
    Ok(total)
}

/// Runs `f` on a pool capped by `NETPOWER_THREADS` when set.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let cap = std::env::var("NETPOWER_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok());
    match cap.filter(|&c| c > 0) {
        Some(c) => match rayon::ThreadPoolBuilder::new().num_threads(c).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NpiResult {
    pub scores: ScoreVector,
    /// Mean link weight `Y[i][j]`: how often `i` was pivotal for `j`.
    pub pivot_frequency: DMatrix<f64>,
}

impl NpiResult {
    pub fn frequency(&self, holder: &str, entity: &str) -> Option<f64> {
        let i = self.scores.ids.iter().position(|x| x == holder)?;
        let j = self.scores.ids.iter().position(|x| x == entity)?;
        Some(self.pivot_frequency[(i, j)])
    }
}

/// Network power index: mean of `(I − dY)⁻¹ v` over the draws.
pub fn npi(net: &Network, cfg: &SimulationConfig) -> Result<NpiResult> {
    let tally = simulate(net, cfg)?;
    let v = net.values();
    let values = if cfg.own_endowment {
        tally.y
    } else {
        tally.y.iter().zip(&v).map(|(y, v)| y - v).collect()
    };
    let scores = params(ScoreVector::new("npi", net, values, false), cfg);
    Ok(NpiResult { scores, pivot_frequency: tally.pivot })
}

fn params(sv: ScoreVector, cfg: &SimulationConfig) -> ScoreVector {
    sv.with_param("iterations", cfg.iterations)
        .with_param("d", cfg.d)
        .with_param("quota", cfg.quota)
        .with_param("seed", cfg.seed)
        .with_param("pivot_rule", match cfg.pivot_rule {
            PivotRule::ShapleyOrder => "shapley-order",
            PivotRule::JohnstonSplit => "johnston-split",
        })
        .with_param("own_endowment", cfg.own_endowment)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowEstimate {
    pub ids: Vec<String>,
    /// `p̂[i][j]`: expected value of `j` transmitted to `i`.
    pub matrix: DMatrix<f64>,
    /// `Σ_{j≠m} p̂[m][j]`.
    pub intermediary: ScoreVector,
}

impl FlowEstimate {
    pub fn get(&self, from: &str, to: &str) -> Option<f64> {
        let i = self.ids.iter().position(|x| x == from)?;
        let j = self.ids.iter().position(|x| x == to)?;
        Some(self.matrix[(i, j)])
    }
}

/// Network power flow: mean transmitted value per ordered pair.
pub fn npf(net: &Network, cfg: &SimulationConfig) -> Result<FlowEstimate> {
    let tally = simulate(net, cfg)?;
    let n = net.len();
    let through = (0..n)
        .map(|m| (0..n).filter(|&j| j != m).map(|j| tally.flow[(m, j)]).sum())
        .collect();
    Ok(FlowEstimate {
        ids: net.ids(),
        matrix: tally.flow,
        intermediary: params(ScoreVector::new("npf", net, through, false), cfg),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileComparison {
    /// `None` when either side has no variation.
    pub spearman: Option<f64>,
    pub k: usize,
    /// Fraction of the top `k` shared by both rankings.
    pub top_k_overlap: f64,
    /// Per node, rank in `b` minus rank in `a` (average ranks, 1 = highest).
    pub rank_deltas: Vec<(String, f64)>,
}

/// Average ranks, 1 for the largest score.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let (mut va, mut vb) = (0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        None
    } else {
        Some(cov / (va * vb).sqrt())
    }
}

pub fn compare_profiles(a: &ScoreVector, b: &ScoreVector, k: usize) -> Result<ProfileComparison> {
    if a.len() != b.len() {
        return Err(Error::MismatchedNodes);
    }
    // align b to a's node order
    let mut bv = Vec::with_capacity(a.len());
    for id in &a.ids {
        bv.push(b.get(id).ok_or(Error::MismatchedNodes)?);
    }
    let n = a.len();
    if n == 0 {
        return Err(Error::MismatchedNodes);
    }
    let k = k.clamp(1, n);
    let top_a: Vec<&str> = a.ranking().into_iter().take(k).collect();
    let top_b: Vec<&str> = b.ranking().into_iter().take(k).collect();
    let shared = top_a.iter().filter(|id| top_b.contains(id)).count();
    let (ra, rb) = (average_ranks(&a.values), average_ranks(&bv));
    Ok(ProfileComparison {
        spearman: spearman(&a.values, &bv),
        k,
        top_k_overlap: shared as f64 / k as f64,
        rank_deltas: a.ids.iter().cloned().zip(ra.iter().zip(&rb).map(|(x, y)| y - x)).collect(),
    })
}
