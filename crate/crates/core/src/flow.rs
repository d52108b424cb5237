//! Propagation measures: network control value, PageRank, Katz cumulative
//! influence and the controller readout built on it.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Network, NodeKind};
use crate::numerics::{self, SolveOptions};
use crate::score::ScoreVector;

pub const DEFAULT_DAMPING: f64 = 0.85;
/// Propagation is refused once the spectral radius gets this close to 1.
pub const DIVERGENCE_MARGIN: f64 = 1e-9;
/// Attenuation used by the controller readout when none is given, as a
/// fraction of `1/ρ(A)`.
pub const DEFAULT_ICON_FRACTION: f64 = 0.9;
pub const DEFAULT_ICON_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    pub damping: f64,
    /// Katz attenuation; `None` picks the readout default.
    pub attenuation: Option<f64>,
    pub solve: SolveOptions,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions { damping: DEFAULT_DAMPING, attenuation: None, solve: SolveOptions::default() }
    }
}

impl PropagationOptions {
    pub fn with_attenuation(alpha: f64) -> Self {
        PropagationOptions { attenuation: Some(alpha), ..Default::default() }
    }
}

fn control_matrix(net: &Network) -> Result<DMatrix<f64>> {
    if !net.is_ownership() {
        return Err(Error::NotOwnershipNetwork);
    }
    Ok(net.adjacency_matrix(false))
}

fn guard_radius(c: &DMatrix<f64>) -> Result<()> {
    let rho = numerics::spectral_radius(c);
    if rho >= 1.0 - DIVERGENCE_MARGIN {
        return Err(Error::DivergentPropagation(rho));
    }
    Ok(())
}

fn identity_minus(c: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::identity(c.nrows(), c.ncols()) - c
}

/// `NCV = (I − C)⁻¹ C v`: value controlled directly and through holdings.
pub fn ncv(net: &Network) -> Result<ScoreVector> {
    ncv_with(net, &SolveOptions::default())
}

pub fn ncv_with(net: &Network, opts: &SolveOptions) -> Result<ScoreVector> {
    let c = control_matrix(net)?;
    guard_radius(&c)?;
    let direct = numerics::mat_vec(&c, &net.values());
    let x = numerics::solve_linear(&identity_minus(&c), &direct, opts)?;
    Ok(ScoreVector::new("ncv", net, x, false))
}

/// NCV without recycled value: walks that pass back through the holder
/// itself are discarded.
///
/// Every walk from `i` splits into return loops followed by a walk that
/// never revisits `i`, so with `M = (I − C)⁻¹`,
/// `NCV_i = M_ii · nNCV_i + (M_ii − 1) v_i`.
pub fn nncv(net: &Network) -> Result<ScoreVector> {
    nncv_with(net, &SolveOptions::default())
}

pub fn nncv_with(net: &Network, opts: &SolveOptions) -> Result<ScoreVector> {
    let c = control_matrix(net)?;
    guard_radius(&c)?;
    let m = numerics::invert(&identity_minus(&c), opts)?;
    let v = net.values();
    let full = numerics::mat_vec(&(&m * &c), &v);
    let values = (0..net.len())
        .map(|i| {
            let mii = m[(i, i)];
            ((full[i] - (mii - 1.0) * v[i]) / mii).max(0.0)
        })
        .collect();
    Ok(ScoreVector::new("nncv", net, values, false))
}

/// PageRank in the unnormalized convention (scores average 1). Dangling
/// nodes link to every node; undirected edges count both ways.
pub fn pagerank(net: &Network, opts: &PropagationOptions) -> Result<ScoreVector> {
    let alpha = opts.damping;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("damping", format!("must lie in (0, 1), got {alpha}")));
    }
    let n = net.len();
    let a = net.binary_adjacency(!net.is_directed());
    // system (I − α Pᵀ) PR = (1 − α) 1 with P row-stochastic
    let mut sys = DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        let out: f64 = a.row(j).sum();
        for i in 0..n {
            let p = if out > 0.0 { a[(j, i)] / out } else { 1.0 / n as f64 };
            sys[(i, j)] -= alpha * p;
        }
    }
    let pr = numerics::solve_linear(&sys, &vec![1.0 - alpha; n], &opts.solve)?;
    Ok(ScoreVector::new("pagerank", net, pr, false).with_param("damping", alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KatzResult {
    /// `T[i][j]`: cumulative influence of `i` over `j`.
    pub matrix: DMatrix<f64>,
    pub attenuation: f64,
    pub spectral_radius: f64,
    /// Row sums of `T`.
    pub scores: ScoreVector,
}

/// `T = A (I − αA)⁻¹`.
pub fn katz_influence(net: &Network, alpha: f64, opts: &SolveOptions) -> Result<KatzResult> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::param("attenuation", format!("must be a nonnegative number, got {alpha}")));
    }
    let a = net.adjacency_matrix(!net.is_directed());
    let rho = numerics::spectral_radius(&a);
    if alpha * rho >= 1.0 - DIVERGENCE_MARGIN {
        return Err(Error::AttenuationTooLarge { alpha, limit: 1.0 / rho });
    }
    let matrix = if alpha == 0.0 {
        a.clone()
    } else {
        let inv = numerics::invert(&(DMatrix::identity(a.nrows(), a.ncols()) - &a * alpha), opts)?;
        &a * inv
    };
    let sums = (0..net.len()).map(|i| matrix.row(i).sum()).collect();
    let scores = ScoreVector::new("katz", net, sums, false).with_param("attenuation", alpha);
    Ok(KatzResult { matrix, attenuation: alpha, spectral_radius: rho, scores })
}

/// Default readout attenuation: a fixed fraction of `1/ρ(A)`, or the
/// fraction itself when the network has no cycles of positive weight.
pub fn default_attenuation(net: &Network) -> f64 {
    let rho = numerics::spectral_radius(&net.adjacency_matrix(!net.is_directed()));
    if rho > 1e-12 {
        DEFAULT_ICON_FRACTION / rho
    } else {
        DEFAULT_ICON_FRACTION
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IconControl {
    pub firm: String,
    /// `None` when no person's cumulative stake reaches the threshold.
    pub controller: Option<String>,
    pub stake: f64,
}

/// For each firm, the person with the largest cumulative stake `T[i][j]`,
/// provided it reaches `threshold`. Equal stakes go to the lowest id.
pub fn alpha_icon_controllers(
    net: &Network,
    opts: &PropagationOptions,
    threshold: f64,
) -> Result<Vec<IconControl>> {
    if !net.is_ownership() {
        return Err(Error::NotOwnershipNetwork);
    }
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::param("threshold", format!("must be positive, got {threshold}")));
    }
    let alpha = opts.attenuation.unwrap_or_else(|| default_attenuation(net));
    let t = katz_influence(net, alpha, &opts.solve)?.matrix;
    let persons: Vec<usize> =
        (0..net.len()).filter(|&i| net.node(i).kind == NodeKind::Person).collect();
    Ok((0..net.len())
        .filter(|&j| net.node(j).kind == NodeKind::Firm)
        .map(|j| {
            let best = persons
                .iter()
                .map(|&i| (i, t[(i, j)]))
                .fold(None::<(usize, f64)>, |acc, (i, s)| match acc {
                    Some((_, bs)) if s <= bs => acc,
                    _ => Some((i, s)),
                });
            let stake = best.map_or(0.0, |(_, s)| s);
            IconControl {
                firm: net.id(j).to_string(),
                controller: best
                    .filter(|&(_, s)| s >= threshold)
                    .map(|(i, _)| net.id(i).to_string()),
                stake,
            }
        })
        .collect())
}
