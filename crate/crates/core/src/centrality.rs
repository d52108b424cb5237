//! Positional centrality: access (degree, eigenvector), brokerage
//! (betweenness, flow betweenness, current-flow walk betweenness) and
//! efficiency (closeness, information, eccentricity).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::numerics::{self, SolveOptions};
use crate::score::ScoreVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// out + in on directed networks
    #[default]
    Both,
    In,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CentralityOptions {
    pub normalized: bool,
    /// Use edge weights (strengths, capacities, lengths) instead of 0/1 ties.
    pub weighted: bool,
    pub direction: Direction,
    /// Closeness on disconnected graphs: sum over reachable nodes only.
    pub per_component: bool,
    pub solve: SolveOptions,
}

impl CentralityOptions {
    pub fn normalized() -> Self {
        CentralityOptions { normalized: true, ..Default::default() }
    }

    pub fn weighted() -> Self {
        CentralityOptions { weighted: true, ..Default::default() }
    }
}

const SYMMETRIZED_WARNING: &str = "directed input symmetrized";

fn tie_matrix(net: &Network, opts: &CentralityOptions) -> DMatrix<f64> {
    if opts.weighted {
        net.adjacency_matrix(true)
    } else {
        net.binary_adjacency(true)
    }
}

fn finish(sv: ScoreVector, opts: &CentralityOptions) -> ScoreVector {
    sv.with_param("weighted", opts.weighted)
}

fn symmetrized(sv: ScoreVector, net: &Network) -> ScoreVector {
    if net.is_directed() {
        sv.with_param("warning", SYMMETRIZED_WARNING)
    } else {
        sv
    }
}

pub fn degree_centrality(net: &Network, opts: &CentralityOptions) -> Result<ScoreVector> {
    let n = net.len();
    if opts.normalized && n == 1 {
        return Err(Error::SingletonNetwork);
    }
    let strength = |list: &[(usize, f64)]| -> f64 {
        if opts.weighted {
            list.iter().map(|&(_, w)| w).sum()
        } else {
            list.len() as f64
        }
    };
    let both_sides = net.is_directed() && opts.direction == Direction::Both;
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let raw = if !net.is_directed() {
                strength(net.out_edges(i))
            } else {
                match opts.direction {
                    Direction::Both => strength(net.out_edges(i)) + strength(net.in_edges(i)),
                    Direction::In => strength(net.in_edges(i)),
                    Direction::Out => strength(net.out_edges(i)),
                }
            };
            if opts.normalized {
                let max_ties = if both_sides { 2.0 } else { 1.0 } * (n as f64 - 1.0);
                raw / max_ties
            } else {
                raw
            }
        })
        .collect();
    let direction = format!("{:?}", opts.direction).to_lowercase();
    Ok(finish(
        ScoreVector::new("degree", net, values, opts.normalized).with_param("direction", direction),
        opts,
    ))
}

/// Perron vector of the symmetrized adjacency, unit 1-norm.
pub fn eigenvector_centrality(net: &Network, opts: &CentralityOptions) -> Result<ScoreVector> {
    let a = tie_matrix(net, opts);
    let eig = numerics::dominant_eigenpair(&a, &opts.solve)?;
    let sv = ScoreVector::new("eigenvector", net, eig.eigenvector, true)
        .with_param("eigenvalue", eig.eigenvalue);
    Ok(finish(symmetrized(sv, net), opts))
}

pub fn closeness_centrality(net: &Network, opts: &CentralityOptions) -> Result<ScoreVector> {
    let n = net.len();
    if n == 1 {
        return Err(Error::SingletonNetwork);
    }
    let geo = numerics::all_pairs_geodesics(net, opts.weighted)?;
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let mut total = 0.0;
        let mut reached = 0usize;
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = geo.dist[i][j];
            if d.is_infinite() {
                if !opts.per_component {
                    return Err(Error::DisconnectedGraph);
                }
            } else {
                total += d;
                reached += 1;
            }
        }
        let c = if reached == 0 || total == 0.0 { 0.0 } else { 1.0 / total };
        values.push(if opts.normalized { c * reached as f64 } else { c });
    }
    Ok(finish(
        ScoreVector::new("closeness", net, values, opts.normalized)
            .with_param("per_component", opts.per_component),
        opts,
    ))
}

fn pair_count(net: &Network) -> f64 {
    let n = net.len() as f64;
    let unordered = (n - 1.0) * (n - 2.0) / 2.0;
    if net.is_directed() {
        2.0 * unordered
    } else {
        unordered
    }
}

/// Geodesic betweenness: unordered pairs on undirected networks, ordered
/// pairs on directed ones.
pub fn betweenness_centrality(net: &Network, opts: &CentralityOptions) -> Result<ScoreVector> {
    let n = net.len();
    let geo = numerics::all_pairs_geodesics(net, opts.weighted)?;
    let mut values = vec![0.0; n];
    for j in 0..n {
        for k in 0..n {
            if j == k || (!net.is_directed() && k < j) {
                continue;
            }
            let djk = geo.dist[j][k];
            if djk.is_infinite() {
                continue;
            }
            for (i, value) in values.iter_mut().enumerate() {
                if i == j || i == k {
                    continue;
                }
                let via = geo.dist[j][i] + geo.dist[i][k];
                if via.is_finite() && (via - djk).abs() <= 1e-12 * djk.max(1.0) {
                    *value += geo.count[j][i] * geo.count[i][k] / geo.count[j][k];
                }
            }
        }
    }
    if opts.normalized && n > 2 {
        let p = pair_count(net);
        values.iter_mut().for_each(|v| *v /= p);
    }
    Ok(finish(ScoreVector::new("betweenness", net, values, opts.normalized), opts))
}

/// Max-flow betweenness. The flow node `i` carries between `j` and `k` is
/// the part of the maximum flow lost when `i` is deleted, which does not
/// depend on how a particular maximum flow happens to be routed.
pub fn flow_betweenness(net: &Network, opts: &CentralityOptions) -> Result<ScoreVector> {
    let n = net.len();
    let cap = if opts.weighted { net.clone() } else { net.with_unit_weights() };
    let mut values = vec![0.0; n];
    let mut pair_flow = vec![0.0; n];
    let mut total_flow = 0.0;
    for j in 0..n {
        for k in 0..n {
            if j == k || (!net.is_directed() && k < j) {
                continue;
            }
            let full = numerics::max_flow_value(&cap, j, k, None)?;
            total_flow += full;
            pair_flow[j] += full;
            pair_flow[k] += full;
            if full <= 0.0 {
                continue;
            }
            for (i, v) in values.iter_mut().enumerate() {
                if i != j && i != k {
                    *v += (full - numerics::max_flow_value(&cap, j, k, Some(i))?).max(0.0);
                }
            }
        }
    }
    if opts.normalized {
        for (i, v) in values.iter_mut().enumerate() {
            // total flow over pairs where i is not an endpoint
            let denom = total_flow - pair_flow[i];
            *v = if denom > 0.0 { *v / denom } else { 0.0 };
        }
    }
    Ok(finish(ScoreVector::new("flow_betweenness", net, values, opts.normalized), opts))
}

/// Current-flow (random-walk) betweenness over unordered pairs.
pub fn walk_betweenness(net: &Network, opts: &CentralityOptions) -> Result<ScoreVector> {
    let n = net.len();
    if !net.is_weakly_connected() {
        return Err(Error::DisconnectedGraph);
    }
    let a = tie_matrix(net, opts);
    let v = numerics::grounded_inverse_of(&a, 0)?;
    let mut values = vec![0.0; n];
    let mut potential = vec![0.0; n];
    for s in 0..n {
        for t in (s + 1)..n {
            for (i, p) in potential.iter_mut().enumerate() {
                *p = v[(i, s)] - v[(i, t)];
            }
            for i in 0..n {
                if i == s || i == t {
                    continue;
                }
                let through: f64 =
                    (0..n).map(|j| a[(i, j)] * (potential[i] - potential[j]).abs()).sum::<f64>();
                values[i] += 0.5 * through;
            }
        }
    }
    if opts.normalized && n > 2 {
        let p = (n as f64 - 1.0) * (n as f64 - 2.0) / 2.0;
        values.iter_mut().for_each(|x| *x /= p);
    }
    let sv = ScoreVector::new("walk_betweenness", net, values, opts.normalized);
    Ok(finish(symmetrized(sv, net), opts))
}

/// Information centrality from `X = L + J` (unit off-diagonal offsets,
/// diagonal `1 + degree`).
pub fn information_centrality(net: &Network, opts: &CentralityOptions) -> Result<ScoreVector> {
    let n = net.len();
    let a = tie_matrix(net, opts);
    if !net.is_weakly_connected() {
        return Err(Error::DisconnectedGraph);
    }
    let mut x = DMatrix::from_element(n, n, 1.0);
    for i in 0..n {
        let mut deg = 0.0;
        for j in 0..n {
            if i != j {
                x[(i, j)] = 1.0 - a[(i, j)];
                deg += a[(i, j)];
            }
        }
        x[(i, i)] = 1.0 + deg;
    }
    let b = numerics::invert(&x, &opts.solve)?;
    let mut values: Vec<f64> = (0..n)
        .map(|i| {
            let spread: f64 = (0..n).map(|j| b[(i, i)] + b[(j, j)] - 2.0 * b[(i, j)]).sum();
            if spread > 0.0 {
                n as f64 / spread
            } else {
                0.0
            }
        })
        .collect();
    if opts.normalized {
        let total: f64 = values.iter().sum();
        if total > 0.0 {
            values.iter_mut().for_each(|v| *v /= total);
        }
    }
    let sv = ScoreVector::new("information", net, values, opts.normalized);
    Ok(finish(symmetrized(sv, net), opts))
}

pub fn eccentricity_centrality(net: &Network, opts: &CentralityOptions) -> Result<ScoreVector> {
    let n = net.len();
    if n == 1 {
        return Err(Error::SingletonNetwork);
    }
    let geo = numerics::all_pairs_geodesics(net, opts.weighted)?;
    let mut values = Vec::with_capacity(n);
    for row in &geo.dist {
        let ecc = row.iter().copied().fold(0.0, f64::max);
        if ecc.is_infinite() {
            return Err(Error::DisconnectedGraph);
        }
        values.push(if ecc > 0.0 { 1.0 / ecc } else { 0.0 });
    }
    Ok(finish(ScoreVector::new("eccentricity", net, values, opts.normalized), opts))
}
