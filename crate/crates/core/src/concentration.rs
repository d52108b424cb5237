//! Concentration indices over share distributions and ultimate-owner tracing.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::voting::{parse_rational, rat_to_f64};

pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_UC_THRESHOLD: f64 = 0.2;
const CUT_TOLERANCE: f64 = 1e-12;

/// Shares held by each actor, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareDistribution {
    ids: Vec<String>,
    shares: Vec<f64>,
    exact: Option<Vec<BigRational>>,
}

impl ShareDistribution {
    pub fn new(ids: Vec<String>, shares: Vec<f64>) -> Result<Self> {
        if shares.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if ids.len() != shares.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} ids but {} shares",
                ids.len(),
                shares.len()
            )));
        }
        let sum: f64 = shares.iter().sum();
        if shares.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0)
            || (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE
        {
            return Err(Error::InvalidDistribution(sum));
        }
        Ok(ShareDistribution { ids, shares, exact: None })
    }

    /// Actors named `1..=n`.
    pub fn from_shares(shares: &[f64]) -> Result<Self> {
        Self::new((1..=shares.len()).map(|i| i.to_string()).collect(), shares.to_vec())
    }

    /// Normalizes nonnegative amounts (holdings, sizes) into shares.
    pub fn from_amounts(ids: Vec<String>, amounts: &[f64]) -> Result<Self> {
        if amounts.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let total: f64 = amounts.iter().sum();
        if amounts.iter().any(|a| !a.is_finite() || *a < 0.0) || total <= 0.0 {
            return Err(Error::InvalidDistribution(total));
        }
        Self::new(ids, amounts.iter().map(|a| a / total).collect())
    }

    /// Exact shares from decimal or `a/b` strings; indices evaluated on
    /// this distribution are correctly rounded.
    pub fn parse(ids: Vec<String>, shares: &[&str]) -> Result<Self> {
        let exact = shares.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
        let mut dist = Self::new(ids, exact.iter().map(rat_to_f64).collect())?;
        dist.exact = Some(exact);
        Ok(dist)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }

    /// Indices by descending share, ties by id.
    fn descending(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.shares[b]
                .partial_cmp(&self.shares[a])
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.ids[a].cmp(&self.ids[b]))
        });
        order
    }
}

pub fn hhi(dist: &ShareDistribution) -> Result<f64> {
    if dist.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if let Some(h) = hhi_exact(dist) {
        return Ok(rat_to_f64(&h));
    }
    Ok(dist.shares.iter().map(|p| p * p).sum())
}

/// Exact HHI when the distribution was parsed from exact values.
pub fn hhi_exact(dist: &ShareDistribution) -> Option<BigRational> {
    dist.exact
        .as_ref()
        .map(|e| e.iter().fold(BigRational::zero(), |acc, p| acc + p * p))
}

pub fn top_k(dist: &ShareDistribution, k: usize) -> Result<f64> {
    let n = dist.len();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let order = dist.descending();
    if let Some(exact) = &dist.exact {
        let s = order[..k].iter().fold(BigRational::zero(), |acc, &i| acc + &exact[i]);
        return Ok(rat_to_f64(&s));
    }
    Ok(order[..k].iter().map(|&i| dist.shares[i]).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NciResult {
    /// `|G| / N × 100`.
    pub percent: f64,
    pub members: Vec<String>,
    pub covered: f64,
}

/// Smallest group of largest actors jointly holding at least `h`.
pub fn nci(dist: &ShareDistribution, h: f64) -> Result<NciResult> {
    if dist.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::param("H", format!("must lie in (0, 1], got {h}")));
    }
    let mut covered = 0.0;
    let mut members = Vec::new();
    for i in dist.descending() {
        covered += dist.shares[i];
        members.push(dist.ids[i].clone());
        if covered + CUT_TOLERANCE >= h {
            break;
        }
    }
    Ok(NciResult { percent: members.len() as f64 / dist.len() as f64 * 100.0, members, covered })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainRule {
    /// Every link on the chain reaches the threshold.
    #[default]
    WeakestLink,
    /// The product of stakes along the chain reaches the threshold.
    Product,
}

impl std::str::FromStr for ChainRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weakest-link" | "weakest_link" => Ok(ChainRule::WeakestLink),
            "product" => Ok(ChainRule::Product),
            _ => Err(Error::param("rule", format!("expected `weakest-link` or `product`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UltimateOwner {
    pub target: String,
    pub owner: String,
    /// Target first, owner last.
    pub chain: Vec<String>,
    /// Effective stake along the chain under the chosen rule (1 for self).
    pub stake: f64,
    /// Set when an equal-largest controller had to be broken by id.
    pub tie: bool,
}

/// Ultimate owner of every node, following the largest controlling
/// shareholder upward until no shareholder qualifies.
pub fn ultimate_control(net: &Network, threshold: f64, rule: ChainRule) -> Result<Vec<UltimateOwner>> {
    if !net.is_ownership() {
        return Err(Error::NotOwnershipNetwork);
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::param("threshold", format!("must lie in (0, 1), got {threshold}")));
    }
    (0..net.len()).map(|t| trace(net, t, threshold, rule)).collect()
}

fn trace(net: &Network, target: usize, threshold: f64, rule: ChainRule) -> Result<UltimateOwner> {
    let mut chain = vec![target];
    let mut stake = 1.0;
    let mut weakest: f64 = 1.0;
    let mut tie = false;
    let mut current = target;
    loop {
        let qualifies = |w: f64| match rule {
            ChainRule::WeakestLink => w + CUT_TOLERANCE >= threshold,
            ChainRule::Product => stake * w + CUT_TOLERANCE >= threshold,
        };
        // in_edges are sorted by shareholder index, which follows id order
        let mut best: Option<(usize, f64)> = None;
        for &(i, w) in net.in_edges(current) {
            if !qualifies(w) {
                continue;
            }
            match best {
                Some((_, bw)) if w < bw => {}
                Some((_, bw)) if w == bw => tie = true,
                _ => best = Some((i, w)),
            }
        }
        let Some((next, w)) = best else { break };
        if let Some(pos) = chain.iter().position(|&c| c == next) {
            return Err(Error::CycleDetected(
                chain[pos..].iter().map(|&c| net.id(c).to_string()).collect(),
            ));
        }
        stake *= w;
        weakest = weakest.min(w);
        chain.push(next);
        current = next;
    }
    Ok(UltimateOwner {
        target: net.id(target).to_string(),
        owner: net.id(current).to_string(),
        chain: chain.iter().map(|&c| net.id(c).to_string()).collect(),
        stake: match rule {
            ChainRule::WeakestLink => weakest,
            ChainRule::Product => stake,
        },
        tie,
    })
}
