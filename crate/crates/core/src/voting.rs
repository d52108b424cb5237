//! Weighted voting games and their network extensions.
//!
//! Every index is computed from a single table of winning coalitions, built
//! once per game. Counts are kept as integers and turned into exact
//! rationals at the end, so efficiency and symmetry hold exactly.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;

pub const MAX_PLAYERS: usize = 20;
pub const MAX_CONTROL_NODES: usize = 16;
pub const DEFAULT_CONTROL_QUOTA: f64 = 0.5;
pub const REDISTRIBUTION_DEPTH: usize = 32;

const FLOAT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedVotingGame {
    players: Vec<String>,
    weights: Vec<f64>,
    quota: f64,
    /// Integer weights and quota after clearing denominators.
    scaled: Option<(Vec<i128>, i128)>,
}

impl WeightedVotingGame {
    /// Float game; coalition sums are compared with a `1e-12` tolerance.
    pub fn new(players: Vec<String>, weights: Vec<f64>, quota: f64) -> Result<Self> {
        check_players(&players, weights.len())?;
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::param("weights", "must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if !quota.is_finite() || quota <= 0.0 || quota > total * (1.0 + FLOAT_EPS) {
            return Err(Error::param("quota", format!("must satisfy 0 < q <= {total}, got {quota}")));
        }
        Ok(WeightedVotingGame { players, weights, quota, scaled: None })
    }

    /// Players named `1..=n`.
    pub fn numbered(weights: &[f64], quota: f64) -> Result<Self> {
        Self::new((1..=weights.len()).map(|i| i.to_string()).collect(), weights.to_vec(), quota)
    }

    /// Exact game; threshold hits are decided without rounding.
    pub fn exact(players: Vec<String>, weights: Vec<BigRational>, quota: BigRational) -> Result<Self> {
        check_players(&players, weights.len())?;
        if weights.iter().any(|w| w < &BigRational::zero()) {
            return Err(Error::param("weights", "must be nonnegative"));
        }
        let total: BigRational = weights.iter().cloned().sum();
        if quota <= BigRational::zero() || quota > total {
            return Err(Error::param("quota", format!("must satisfy 0 < q <= {total}, got {quota}")));
        }
        let lcm = weights
            .iter()
            .chain(std::iter::once(&quota))
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let to_int = |r: &BigRational| -> Result<i128> {
            (r.numer() * (&lcm / r.denom()))
                .to_i128()
                .ok_or_else(|| Error::param("weights", "too large for exact comparison"))
        };
        let ints = weights.iter().map(to_int).collect::<Result<Vec<_>>>()?;
        let q = to_int(&quota)?;
        // the scaled total must also fit
        ints.iter().try_fold(0i128, |a, &w| a.checked_add(w))
            .ok_or_else(|| Error::param("weights", "too large for exact comparison"))?;
        Ok(WeightedVotingGame {
            players,
            weights: weights.iter().map(rat_to_f64).collect(),
            quota: rat_to_f64(&quota),
            scaled: Some((ints, q)),
        })
    }

    /// Exact game from decimal or `a/b` strings.
    pub fn parse_exact(players: Vec<String>, weights: &[&str], quota: &str) -> Result<Self> {
        let w = weights.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
        Self::exact(players, w, parse_rational(quota)?)
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn quota(&self) -> f64 {
        self.quota
    }

    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.scaled.is_some()
    }

    fn wins_mask(&self, mask: usize) -> bool {
        match &self.scaled {
            Some((w, q)) => {
                let sum: i128 = (0..w.len()).filter(|i| mask >> i & 1 == 1).map(|i| w[i]).sum();
                sum >= *q
            }
            None => {
                let sum: f64 =
                    (0..self.len()).filter(|i| mask >> i & 1 == 1).map(|i| self.weights[i]).sum();
                sum + FLOAT_EPS * self.quota.max(1.0) >= self.quota
            }
        }
    }

    fn table(&self) -> Result<WinTable> {
        let n = self.len();
        if n > MAX_PLAYERS {
            return Err(Error::TooManyPlayers { limit: MAX_PLAYERS, got: n });
        }
        let mut win = vec![false; 1 << n];
        match &self.scaled {
            Some((w, q)) => {
                let mut sums = vec![0i128; 1 << n];
                for mask in 1..(1usize << n) {
                    let low = mask.trailing_zeros() as usize;
                    sums[mask] = sums[mask & (mask - 1)] + w[low];
                    win[mask] = sums[mask] >= *q;
                }
            }
            None => {
                let mut sums = vec![0f64; 1 << n];
                let slack = FLOAT_EPS * self.quota.max(1.0);
                for mask in 1..(1usize << n) {
                    let low = mask.trailing_zeros() as usize;
                    sums[mask] = sums[mask & (mask - 1)] + self.weights[low];
                    win[mask] = sums[mask] + slack >= self.quota;
                }
            }
        }
        Ok(WinTable { n, win })
    }
}

fn check_players(players: &[String], n_weights: usize) -> Result<()> {
    if players.is_empty() {
        return Err(Error::param("players", "at least one player required"));
    }
    if players.len() != n_weights {
        return Err(Error::DimensionMismatch(format!(
            "{} players but {} weights",
            players.len(),
            n_weights
        )));
    }
    let mut seen = HashSet::new();
    for p in players {
        if !seen.insert(p) {
            return Err(Error::param("players", format!("duplicate player `{p}`")));
        }
    }
    Ok(())
}

/// Parses `"3"`, `"0.49"`, `"-1.5e-2"` or `"2/7"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::param("number", format!("cannot parse `{s}` as a rational"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if frac_part.chars().any(|c| !c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(bad());
    }
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    })
}

pub(crate) fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `win[S]` for every coalition bitmask `S`.
struct WinTable {
    n: usize,
    win: Vec<bool>,
}

impl WinTable {
    /// `swings[i][s]`: coalitions of size `s` without `i` that `i` turns winning.
    fn swings_by_size(&self) -> Vec<Vec<u64>> {
        let n = self.n;
        let mut out = vec![vec![0u64; n]; n];
        for mask in 0..(1usize << n) {
            if self.win[mask] {
                continue;
            }
            let size = mask.count_ones() as usize;
            for (i, row) in out.iter_mut().enumerate() {
                if mask >> i & 1 == 0 && self.win[mask | 1 << i] {
                    row[size] += 1;
                }
            }
        }
        out
    }

    fn shapley_shubik(&self) -> Vec<BigRational> {
        let n = self.n;
        let fact: Vec<BigInt> = (0..=n)
            .scan(BigInt::one(), |acc, k| {
                if k > 0 {
                    *acc *= k;
                }
                Some(acc.clone())
            })
            .collect();
        self.swings_by_size()
            .into_iter()
            .map(|row| {
                let num: BigInt = row
                    .iter()
                    .enumerate()
                    .map(|(s, &c)| BigInt::from(c) * &fact[s] * &fact[n - 1 - s])
                    .sum();
                BigRational::new(num, fact[n].clone())
            })
            .collect()
    }

    fn swing_counts(&self) -> Vec<u64> {
        self.swings_by_size().into_iter().map(|row| row.iter().sum()).collect()
    }

    /// `crit[i][k-1]`: vulnerable coalitions with `k` critical members containing critical `i`.
    fn critical_counts(&self) -> Vec<Vec<u64>> {
        let n = self.n;
        let mut out = vec![vec![0u64; n]; n];
        let mut critical = Vec::with_capacity(n);
        for mask in 1..(1usize << n) {
            if !self.win[mask] {
                continue;
            }
            critical.clear();
            critical.extend((0..n).filter(|&i| mask >> i & 1 == 1 && !self.win[mask ^ 1 << i]));
            if let Some(k) = critical.len().checked_sub(1) {
                for &i in &critical {
                    out[i][k] += 1;
                }
            }
        }
        out
    }

    /// Unnormalized Johnston scores `Σ_{S∈VC_i} 1/k(S)`.
    fn johnston_raw(&self) -> Vec<BigRational> {
        self.critical_counts()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(k, &c)| BigRational::new(BigInt::from(c), BigInt::from(k + 1)))
                    .sum()
            })
            .collect()
    }
}

/// Scores over the players of a game or the nodes of a control structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    pub index: String,
    pub players: Vec<String>,
    pub values: Vec<f64>,
    /// Unnormalized counterpart, e.g. Banzhaf swing counts.
    pub raw_values: Option<Vec<f64>>,
    #[serde(skip)]
    pub exact: Option<Vec<BigRational>>,
}

impl PowerProfile {
    fn from_exact(index: &str, players: Vec<String>, exact: Vec<BigRational>) -> Self {
        PowerProfile {
            index: index.to_string(),
            players,
            values: exact.iter().map(rat_to_f64).collect(),
            raw_values: None,
            exact: Some(exact),
        }
    }

    pub fn get(&self, player: &str) -> Option<f64> {
        self.players.iter().position(|p| p == player).map(|i| self.values[i])
    }

    pub fn get_exact(&self, player: &str) -> Option<&BigRational> {
        let i = self.players.iter().position(|p| p == player)?;
        self.exact.as_ref().map(|e| &e[i])
    }

    pub fn as_map(&self) -> BTreeMap<String, f64> {
        self.players.iter().cloned().zip(self.values.iter().copied()).collect()
    }
}

/// `v(S)`: true iff the coalition meets the quota.
pub fn characteristic(game: &WeightedVotingGame, coalition: &[&str]) -> Result<bool> {
    let mut mask = 0usize;
    for id in coalition {
        let i = game
            .players
            .iter()
            .position(|p| p == id)
            .ok_or_else(|| Error::UnknownPlayer(id.to_string()))?;
        if i >= usize::BITS as usize {
            return Err(Error::TooManyPlayers { limit: usize::BITS as usize, got: game.len() });
        }
        mask |= 1 << i;
    }
    Ok(mask != 0 && game.wins_mask(mask))
}

pub fn shapley_shubik(game: &WeightedVotingGame) -> Result<PowerProfile> {
    let t = game.table()?;
    Ok(PowerProfile::from_exact("shapley_shubik", game.players.clone(), t.shapley_shubik()))
}

/// Raw `β_i = η_i / 2^(n-1)`; normalized `β'_i = η_i / Σ η_j`.
/// `raw_values` always carries the swing counts `η`.
pub fn banzhaf(game: &WeightedVotingGame, normalized: bool) -> Result<PowerProfile> {
    let t = game.table()?;
    let eta = t.swing_counts();
    let total: u64 = eta.iter().sum();
    let exact: Vec<BigRational> = if normalized {
        if total == 0 {
            return Err(Error::AllPowerless);
        }
        eta.iter().map(|&e| BigRational::new(e.into(), total.into())).collect()
    } else {
        let denom = BigInt::one() << (game.len() - 1);
        eta.iter().map(|&e| BigRational::new(e.into(), denom.clone())).collect()
    };
    let mut p = PowerProfile::from_exact(
        if normalized { "banzhaf_normalized" } else { "banzhaf" },
        game.players.clone(),
        exact,
    );
    p.raw_values = Some(eta.iter().map(|&e| e as f64).collect());
    Ok(p)
}

pub fn johnston(game: &WeightedVotingGame) -> Result<PowerProfile> {
    let t = game.table()?;
    let raw = t.johnston_raw();
    let total: BigRational = raw.iter().cloned().sum();
    if total.is_zero() {
        return Err(Error::NoVulnerableCoalitions);
    }
    let exact = raw.iter().map(|r| r / &total).collect();
    let mut p = PowerProfile::from_exact("johnston", game.players.clone(), exact);
    p.raw_values = Some(raw.iter().map(rat_to_f64).collect());
    Ok(p)
}

/// Ownership network plus a per-node control quota on total shares outstanding.
#[derive(Debug, Clone)]
pub struct ControlStructure {
    network: Network,
    quota: Vec<f64>,
}

impl ControlStructure {
    pub fn new(network: Network) -> Result<Self> {
        Self::with_quota(network, DEFAULT_CONTROL_QUOTA)
    }

    pub fn with_quota(network: Network, quota: f64) -> Result<Self> {
        if !network.is_ownership() {
            return Err(Error::NotOwnershipNetwork);
        }
        check_quota(quota)?;
        let quota = vec![quota; network.len()];
        Ok(ControlStructure { network, quota })
    }

    pub fn set_quota(&mut self, node: &str, quota: f64) -> Result<()> {
        check_quota(quota)?;
        let i = self.network.index_of(node)?;
        self.quota[i] = quota;
        Ok(())
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn quota(&self, i: usize) -> f64 {
        self.quota[i]
    }

    /// Closure over index-membership flags.
    pub(crate) fn closure_flags(&self, members: &[bool]) -> Vec<bool> {
        let n = self.network.len();
        let mut controlled = vec![false; n];
        loop {
            let mut changed = false;
            for j in 0..n {
                if controlled[j] {
                    continue;
                }
                let held: f64 = self
                    .network
                    .in_edges(j)
                    .iter()
                    .filter(|&&(i, _)| members[i] || controlled[i])
                    .map(|&(_, w)| w)
                    .sum();
                if held + FLOAT_EPS >= self.quota[j] {
                    controlled[j] = true;
                    changed = true;
                }
            }
            if !changed {
                return controlled;
            }
        }
    }

    fn closure_mask(&self, mask: usize) -> usize {
        let n = self.network.len();
        let members: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        self.closure_flags(&members)
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &c)| if c { acc | 1 << i } else { acc })
    }

    fn check_size(&self) -> Result<()> {
        let n = self.network.len();
        if n > MAX_CONTROL_NODES {
            return Err(Error::TooManyNodes { limit: MAX_CONTROL_NODES, got: n });
        }
        Ok(())
    }

    /// Shareholder game of node `j`: shares as weights, the node's quota.
    /// `None` when nobody holds shares in `j`.
    fn shareholder_table(&self, j: usize) -> Option<(Vec<usize>, WinTable)> {
        let holders = self.network.in_edges(j);
        if holders.is_empty() {
            return None;
        }
        let k = holders.len();
        let slack = FLOAT_EPS;
        let mut win = vec![false; 1 << k];
        let mut sums = vec![0f64; 1 << k];
        for mask in 1..(1usize << k) {
            let low = mask.trailing_zeros() as usize;
            sums[mask] = sums[mask & (mask - 1)] + holders[low].1;
            win[mask] = sums[mask] + slack >= self.quota[j];
        }
        Some((holders.iter().map(|&(i, _)| i).collect(), WinTable { n: k, win }))
    }
}

fn check_quota(q: f64) -> Result<()> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::param("quota", format!("control quota must lie in (0, 1], got {q}")));
    }
    Ok(())
}

/// Nodes controlled by the coalition, directly or through controlled nodes.
pub fn control_closure(cs: &ControlStructure, coalition: &[&str]) -> Result<BTreeSet<String>> {
    let net = cs.network();
    let mut members = vec![false; net.len()];
    for id in coalition {
        members[net.index_of(id)?] = true;
    }
    Ok(cs
        .closure_flags(&members)
        .iter()
        .enumerate()
        .filter(|(_, &c)| c)
        .map(|(i, _)| net.id(i).to_string())
        .collect())
}

/// `Φ_i = Σ_k SS_i(v_k) − [i controlled by the grand coalition]`, where
/// `v_k(S) = 1` iff `k` lies in the closure of `S`.
pub fn karos_peters_phi(cs: &ControlStructure) -> Result<PowerProfile> {
    cs.check_size()?;
    let net = cs.network();
    let n = net.len();
    let closures: Vec<usize> = (0..(1usize << n)).map(|m| cs.closure_mask(m)).collect();
    let mut phi = vec![BigRational::zero(); n];
    for k in 0..n {
        let win: Vec<bool> = closures.iter().map(|&c| c >> k & 1 == 1).collect();
        if !win.iter().any(|&w| w) {
            continue;
        }
        let ss = WinTable { n, win }.shapley_shubik();
        for (p, s) in phi.iter_mut().zip(ss) {
            *p += s;
        }
    }
    let grand = closures[(1usize << n) - 1];
    for (i, p) in phi.iter_mut().enumerate() {
        if grand >> i & 1 == 1 {
            *p -= BigRational::one();
        }
    }
    Ok(PowerProfile::from_exact("karos_peters", net.ids(), phi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PiVariant {
    /// Owned holders pass value to their shareholders in equal parts.
    #[default]
    Pi,
    /// Owned holders pass value in proportion to absolute Johnston values.
    PiPrime,
}

impl std::str::FromStr for PiVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pi" => Ok(PiVariant::Pi),
            "pi-prime" | "pi_prime" | "pi'" => Ok(PiVariant::PiPrime),
            _ => Err(Error::param("variant", format!("expected `pi` or `pi-prime`, got `{s}`"))),
        }
    }
}

/// Implicit power: absolute Johnston values in every shareholder game,
/// pushed up through owned shareholders until only unowned actors hold
/// value, then summed and normalized.
pub fn mercik_lobos_pi(cs: &ControlStructure, variant: PiVariant) -> Result<PowerProfile> {
    cs.check_size()?;
    let net = cs.network();
    let n = net.len();

    // absolute Johnston value of each holder in each shareholder game
    let mut games: Vec<Option<(Vec<usize>, Vec<f64>)>> = Vec::with_capacity(n);
    for j in 0..n {
        games.push(cs.shareholder_table(j).map(|(holders, t)| {
            let scale = BigRational::new(BigInt::one(), BigInt::one() << (t.n - 1));
            let abs = t.johnston_raw().iter().map(|r| rat_to_f64(&(r * &scale))).collect();
            (holders, abs)
        }));
    }

    let mut pending = vec![0.0; n];
    for (holders, abs) in games.iter().flatten() {
        for (&i, &a) in holders.iter().zip(abs) {
            pending[i] += a;
        }
    }
    let initial: f64 = pending.iter().sum();
    if initial == 0.0 {
        return Ok(PowerProfile {
            index: variant_name(variant).into(),
            players: net.ids(),
            values: vec![0.0; n],
            raw_values: Some(vec![0.0; n]),
            exact: None,
        });
    }

    let mut settled = vec![0.0; n];
    for _ in 0..=REDISTRIBUTION_DEPTH {
        let mut next = vec![0.0; n];
        for i in 0..n {
            let value = pending[i];
            if value == 0.0 {
                continue;
            }
            match &games[i] {
                None => settled[i] += value,
                Some((holders, abs)) => match variant {
                    PiVariant::Pi => {
                        let part = value / holders.len() as f64;
                        for &h in holders {
                            next[h] += part;
                        }
                    }
                    PiVariant::PiPrime => {
                        let total: f64 = abs.iter().sum();
                        if total > 0.0 {
                            for (&h, &a) in holders.iter().zip(abs) {
                                next[h] += value * a / total;
                            }
                        }
                    }
                },
            }
        }
        pending = next;
        let left: f64 = pending.iter().sum();
        if left <= 1e-9 * initial {
            for (s, p) in settled.iter_mut().zip(&pending) {
                *s += p;
            }
            let total: f64 = settled.iter().sum();
            let values = settled.iter().map(|s| if total > 0.0 { s / total } else { 0.0 }).collect();
            return Ok(PowerProfile {
                index: variant_name(variant).into(),
                players: net.ids(),
                values,
                raw_values: Some(settled),
                exact: None,
            });
        }
    }
    Err(Error::CycleDepthExceeded(REDISTRIBUTION_DEPTH))
}

fn variant_name(v: PiVariant) -> &'static str {
    match v {
        PiVariant::Pi => "mercik_lobos_pi",
        PiVariant::PiPrime => "mercik_lobos_pi_prime",
    }
}
