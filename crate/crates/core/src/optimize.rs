//! Minimum-cost acquisition of indirect control.
//!
//! A plan fixes which non-target nodes are controlled (`x`); the cheapest
//! direct purchases `z` then follow in closed form, so the search runs over
//! `x` alone by depth-first branch-and-bound.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::numerics::scc_of;

pub const MAX_FREE_NODES: usize = 24;
/// Largest cyclic block the certification-order search will enumerate.
pub const MAX_CYCLIC_BLOCK: usize = 20;
pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_PRICE: f64 = 1.0;
const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Ic,
    /// Shares held by targets do not help control non-targets.
    Ic2,
    /// As `Ic2`, and reciprocal cross-holdings count nowhere.
    Ic3,
    /// Control must be certified along an acyclic order.
    Ccp,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Ic, Variant::Ic2, Variant::Ic3, Variant::Ccp];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Ic => "ic",
            Variant::Ic2 => "ic2",
            Variant::Ic3 => "ic3",
            Variant::Ccp => "ccp",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ic" => Ok(Variant::Ic),
            "ic2" => Ok(Variant::Ic2),
            "ic3" => Ok(Variant::Ic3),
            "ccp" => Ok(Variant::Ccp),
            _ => Err(Error::param("variant", format!("expected ic, ic2, ic3 or ccp, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AcquisitionProblem {
    network: Network,
    targets: Vec<bool>,
    thresholds: Vec<f64>,
    prices: Vec<f64>,
    pub variant: Variant,
    /// Refuse purchases beyond the shares nobody holds yet.
    pub cap_to_free_float: bool,
}

impl AcquisitionProblem {
    pub fn new(network: Network, targets: &[&str], variant: Variant) -> Result<Self> {
        if !network.is_ownership() {
            return Err(Error::NotOwnershipNetwork);
        }
        if targets.is_empty() {
            return Err(Error::param("targets", "at least one target required"));
        }
        let n = network.len();
        let mut flags = vec![false; n];
        for t in targets {
            flags[network.index_of(t)?] = true;
        }
        Ok(AcquisitionProblem {
            network,
            targets: flags,
            thresholds: vec![DEFAULT_THRESHOLD; n],
            prices: vec![DEFAULT_PRICE; n],
            variant,
            cap_to_free_float: true,
        })
    }

    pub fn set_threshold(&mut self, node: &str, alpha: f64) -> Result<()> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param("threshold", format!("must lie in (0, 1], got {alpha}")));
        }
        let i = self.network.index_of(node)?;
        self.thresholds[i] = alpha;
        Ok(())
    }

    pub fn set_price(&mut self, node: &str, price: f64) -> Result<()> {
        if !(price > 0.0 && price.is_finite()) {
            return Err(Error::param("price", format!("must be positive, got {price}")));
        }
        let i = self.network.index_of(node)?;
        self.prices[i] = price;
        Ok(())
    }

    pub fn with_variant(&self, variant: Variant) -> Self {
        AcquisitionProblem { variant, ..self.clone() }
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn is_target(&self, i: usize) -> bool {
        self.targets[i]
    }

    pub fn threshold(&self, i: usize) -> f64 {
        self.thresholds[i]
    }

    pub fn price(&self, i: usize) -> f64 {
        self.prices[i]
    }

    pub fn free_nodes(&self) -> Vec<usize> {
        (0..self.network.len()).filter(|&i| !self.targets[i]).collect()
    }

    /// Shareholders whose stakes count toward `j`'s constraint under the variant.
    fn contributors(&self, j: usize) -> Vec<(usize, f64)> {
        let net = &self.network;
        net.in_edges(j)
            .iter()
            .copied()
            .filter(|&(i, _)| match self.variant {
                Variant::Ic | Variant::Ccp => true,
                Variant::Ic2 => self.targets[j] || !self.targets[i],
                Variant::Ic3 => {
                    (self.targets[j] || !self.targets[i]) && net.weight(j, i).is_none()
                }
            })
            .collect()
    }

    fn purchase_limit(&self, j: usize) -> f64 {
        if self.cap_to_free_float {
            self.network.free_float(j)
        } else {
            f64::INFINITY
        }
    }
}

/// One constraint row: `z_j + Σ s_ij·[i controlled] ≥ α_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRow {
    pub node: String,
    pub threshold: f64,
    /// True for targets; otherwise the row binds only when the node is controlled.
    pub unconditional: bool,
    pub contributors: Vec<(String, f64)>,
    /// Contributions count only from nodes earlier in a certification order.
    pub ordered: bool,
    pub purchase_limit: f64,
}

pub fn variant_constraints(prob: &AcquisitionProblem, variant: Variant) -> Vec<ConstraintRow> {
    let p = prob.with_variant(variant);
    let net = p.network();
    (0..net.len())
        .map(|j| ConstraintRow {
            node: net.id(j).to_string(),
            threshold: p.thresholds[j],
            unconditional: p.targets[j],
            contributors: p
                .contributors(j)
                .into_iter()
                .map(|(i, s)| (net.id(i).to_string(), s))
                .collect(),
            ordered: variant == Variant::Ccp,
            purchase_limit: p.purchase_limit(j),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionPlan {
    pub ids: Vec<String>,
    pub variant: Variant,
    /// `z_j`, fraction of `j` bought directly.
    pub purchases: Vec<f64>,
    /// `x_j`; always true for targets.
    pub controlled: Vec<bool>,
    pub total_cost: f64,
    /// Certification order of the controlled set (CCP only).
    pub order: Option<Vec<String>>,
}

impl AcquisitionPlan {
    pub fn controlled_ids(&self) -> BTreeSet<String> {
        self.ids.iter().zip(&self.controlled).filter(|(_, &c)| c).map(|(id, _)| id.clone()).collect()
    }

    pub fn purchase(&self, id: &str) -> Option<f64> {
        self.ids.iter().position(|x| x == id).map(|i| self.purchases[i])
    }
}

struct Shortfall {
    node: usize,
    needed: f64,
}

type Priced = std::result::Result<(Vec<f64>, Option<Vec<usize>>), Shortfall>;

/// Cheapest purchases for a fixed controlled set (targets included).
fn price_controlled(prob: &AcquisitionProblem, controlled: &[bool]) -> Result<Priced> {
    if prob.variant == Variant::Ccp {
        return price_ordered(prob, controlled);
    }
    let n = prob.network.len();
    let mut z = vec![0.0; n];
    for j in (0..n).filter(|&j| controlled[j]) {
        let inherited: f64 =
            prob.contributors(j).iter().filter(|&&(i, _)| controlled[i]).map(|&(_, s)| s).sum();
        let need = (prob.thresholds[j] - inherited).max(0.0);
        if need > prob.purchase_limit(j) + EPS {
            return Ok(Err(Shortfall { node: j, needed: need }));
        }
        z[j] = if need > EPS { need } else { 0.0 };
    }
    Ok(Ok((z, None)))
}

/// CCP pricing: blocks of the controlled subgraph are certified in
/// topological order; inside a cyclic block the order is chosen by an
/// exact subset search.
fn price_ordered(prob: &AcquisitionProblem, controlled: &[bool]) -> Result<Priced> {
    let net = &prob.network;
    let n = net.len();
    let members: Vec<usize> = (0..n).filter(|&j| controlled[j]).collect();
    let mut local = vec![usize::MAX; n];
    for (k, &j) in members.iter().enumerate() {
        local[j] = k;
    }
    let succ: Vec<Vec<usize>> = members
        .iter()
        .map(|&i| net.out_edges(i).iter().filter(|&&(j, _)| controlled[j]).map(|&(j, _)| local[j]).collect())
        .collect();
    let blocks = scc_of(&succ);
    let mut block_of = vec![0; members.len()];
    for (b, block) in blocks.iter().enumerate() {
        for &k in block {
            block_of[k] = b;
        }
    }

    // Kahn over the condensation, lowest block first among ready ones
    let mut indeg = vec![0usize; blocks.len()];
    let mut down: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); blocks.len()];
    for (k, list) in succ.iter().enumerate() {
        for &m in list {
            let (a, b) = (block_of[k], block_of[m]);
            if a != b && down[a].insert(b) {
                indeg[b] += 1;
            }
        }
    }
    let mut ready: BTreeSet<usize> = (0..blocks.len()).filter(|&b| indeg[b] == 0).collect();
    let mut z = vec![0.0; n];
    let mut order = Vec::with_capacity(members.len());
    while let Some(b) = ready.pop_first() {
        let block: Vec<usize> = blocks[b].iter().map(|&k| members[k]).collect();
        match order_block(prob, controlled, &block, &block_of, &local, b)? {
            Err(s) => return Ok(Err(s)),
            Ok(seq) => {
                for (j, zj) in seq {
                    z[j] = zj;
                    order.push(j);
                }
            }
        }
        for &c in &down[b] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.insert(c);
            }
        }
    }
    Ok(Ok((z, Some(order))))
}

type BlockOrder = std::result::Result<Vec<(usize, f64)>, Shortfall>;

fn order_block(
    prob: &AcquisitionProblem,
    controlled: &[bool],
    block: &[usize],
    block_of: &[usize],
    local: &[usize],
    b: usize,
) -> Result<BlockOrder> {
    let k = block.len();
    if k > MAX_CYCLIC_BLOCK {
        return Err(Error::TooLarge { limit: MAX_CYCLIC_BLOCK, got: k });
    }
    // contributions from earlier blocks, and from each block member
    let mut outside = vec![0.0; k];
    let mut inside = vec![vec![0.0; k]; k];
    for (a, &j) in block.iter().enumerate() {
        for (i, s) in prob.contributors(j) {
            if !controlled[i] {
                continue;
            }
            if block_of[local[i]] == b {
                let c = block.iter().position(|&x| x == i).expect("block member");
                inside[a][c] = s;
            } else {
                outside[a] += s;
            }
        }
    }
    let need = |a: usize, placed: usize| -> f64 {
        let got: f64 = outside[a]
            + (0..k).filter(|&c| placed >> c & 1 == 1).map(|c| inside[a][c]).sum::<f64>();
        (prob.thresholds[block[a]] - got).max(0.0)
    };
    let full = (1usize << k) - 1;
    let mut cost = vec![f64::INFINITY; 1 << k];
    let mut last = vec![usize::MAX; 1 << k];
    cost[0] = 0.0;
    let mut worst: Option<Shortfall> = None;
    for placed in 0..full {
        if cost[placed].is_infinite() {
            continue;
        }
        for a in (0..k).filter(|&a| placed >> a & 1 == 0) {
            let z = need(a, placed);
            if z > prob.purchase_limit(block[a]) + EPS {
                if worst.is_none() {
                    worst = Some(Shortfall { node: block[a], needed: z });
                }
                continue;
            }
            let next = placed | 1 << a;
            let c = cost[placed] + prob.prices[block[a]] * z;
            if c < cost[next] - EPS {
                cost[next] = c;
                last[next] = a;
            }
        }
    }
    if cost[full].is_infinite() {
        return Ok(Err(worst.expect("blocked transition recorded")));
    }
    let mut seq = Vec::with_capacity(k);
    let mut placed = full;
    while placed != 0 {
        let a = last[placed];
        placed ^= 1 << a;
        let z = need(a, placed);
        seq.push((block[a], if z > EPS { z } else { 0.0 }));
    }
    seq.reverse();
    Ok(Ok(seq))
}

fn build_plan(prob: &AcquisitionProblem, controlled: Vec<bool>, z: Vec<f64>, order: Option<Vec<usize>>) -> AcquisitionPlan {
    let net = &prob.network;
    let total_cost = z.iter().zip(&prob.prices).map(|(z, p)| z * p).sum();
    AcquisitionPlan {
        ids: net.ids(),
        variant: prob.variant,
        purchases: z,
        controlled,
        total_cost,
        order: order.map(|o| o.into_iter().map(|i| net.id(i).to_string()).collect()),
    }
}

/// Plan induced by controlling exactly `controlled` (node ids; targets are
/// always controlled).
pub fn evaluate_plan(prob: &AcquisitionProblem, controlled: &[&str]) -> Result<AcquisitionPlan> {
    let mut flags = prob.targets.clone();
    for id in controlled {
        flags[prob.network.index_of(id)?] = true;
    }
    evaluate_flags(prob, flags)
}

pub fn evaluate_flags(prob: &AcquisitionProblem, mut controlled: Vec<bool>) -> Result<AcquisitionPlan> {
    if controlled.len() != prob.network.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} flags for {} nodes",
            controlled.len(),
            prob.network.len()
        )));
    }
    for (c, &t) in controlled.iter_mut().zip(&prob.targets) {
        *c |= t;
    }
    match price_controlled(prob, &controlled)? {
        Ok((z, order)) => Ok(build_plan(prob, controlled, z, order)),
        Err(s) => Err(Error::SharesUnavailable {
            node: prob.network.id(s.node).to_string(),
            needed: s.needed,
            available: prob.network.free_float(s.node),
        }),
    }
}

/// Cheapest plan over every choice of controlled non-targets. Among plans
/// within `1e-12` of the optimum the lexicographically smallest `x` wins.
pub fn solve_min_cost_control(prob: &AcquisitionProblem) -> Result<AcquisitionPlan> {
    let free = prob.free_nodes();
    if free.len() > MAX_FREE_NODES {
        return Err(Error::TooLarge { limit: MAX_FREE_NODES, got: free.len() });
    }
    let mut search = Search {
        prob,
        free: &free,
        contrib: (0..prob.network.len()).map(|j| prob.contributors(j)).collect(),
        best: None,
    };
    let mut x = prob.targets.clone();
    search.descend(0, &mut x)?;
    let (_, controlled, z, order) = search.best.ok_or(Error::Infeasible)?;
    Ok(build_plan(prob, controlled, z, order))
}

type Incumbent = (f64, Vec<bool>, Vec<f64>, Option<Vec<usize>>);

struct Search<'a> {
    prob: &'a AcquisitionProblem,
    free: &'a [usize],
    contrib: Vec<Vec<(usize, f64)>>,
    best: Option<Incumbent>,
}

impl Search<'_> {
    /// Lower bound for every completion of the first `depth` free choices:
    /// undecided nodes are assumed controlled (maximal inherited stakes) but
    /// only nodes already known to be controlled are priced.
    fn bound(&self, depth: usize, x: &[bool]) -> Option<f64> {
        let undecided = &self.free[depth..];
        let optimistic = |i: usize| x[i] || undecided.binary_search(&i).is_ok();
        let mut total = 0.0;
        for j in (0..x.len()).filter(|&j| x[j]) {
            let inherited: f64 =
                self.contrib[j].iter().filter(|&&(i, _)| optimistic(i)).map(|&(_, s)| s).sum();
            let need = (self.prob.thresholds[j] - inherited).max(0.0);
            if need > self.prob.purchase_limit(j) + EPS {
                return None;
            }
            total += self.prob.prices[j] * need;
        }
        Some(total)
    }

    fn descend(&mut self, depth: usize, x: &mut Vec<bool>) -> Result<()> {
        let Some(bound) = self.bound(depth, x) else { return Ok(()) };
        if let Some((best, ..)) = &self.best {
            if bound >= best - EPS {
                return Ok(());
            }
        }
        if depth == self.free.len() {
            if let Ok((z, order)) = price_controlled(self.prob, x)? {
                let cost: f64 = z.iter().zip(&self.prob.prices).map(|(z, p)| z * p).sum();
                if self.best.as_ref().is_none_or(|(b, ..)| cost < b - EPS) {
                    self.best = Some((cost, x.clone(), z, order));
                }
            }
            return Ok(());
        }
        let node = self.free[depth];
        for choice in [false, true] {
            x[node] = choice;
            self.descend(depth + 1, x)?;
        }
        x[node] = false;
        Ok(())
    }
}
