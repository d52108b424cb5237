//! Cross-family comparison: one representative measure per family, ranked
//! side by side, with ultimate-controller and intermediary summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::centrality::{self, CentralityOptions};
use crate::concentration::{self, ChainRule, ShareDistribution, DEFAULT_UC_THRESHOLD};
use crate::error::{Error, Result};
use crate::flow::{self, PropagationOptions};
use crate::graph::{Network, NodeKind};
use crate::hybrid::{self, PivotRule, SimulationConfig};
use crate::numerics::SolveOptions;
use crate::optimize::{self, AcquisitionProblem, Variant};
use crate::score::ScoreVector;
use crate::voting::{self, ControlStructure, PiVariant, MAX_CONTROL_NODES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Centrality,
    GameTheoretic,
    Concentration,
    FlowBased,
    Optimization,
    Hybrid,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Centrality,
        Family::GameTheoretic,
        Family::Concentration,
        Family::FlowBased,
        Family::Optimization,
        Family::Hybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Centrality => "centrality",
            Family::GameTheoretic => "game_theoretic",
            Family::Concentration => "concentration",
            Family::FlowBased => "flow_based",
            Family::Optimization => "optimization",
            Family::Hybrid => "hybrid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rating {
    Poor,
    Fair,
    Good,
    Excellent,
}

/// One row of the qualitative comparison of measure groups.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodRating {
    pub methods: &'static str,
    pub family: Family,
    pub uc: Rating,
    /// Set when the rating holds for a single firm only.
    pub uc_single_firm: bool,
    pub ip: Rating,
    pub assumption: &'static str,
}

const fn row(
    methods: &'static str,
    family: Family,
    uc: Rating,
    ip: Rating,
    assumption: &'static str,
) -> MethodRating {
    MethodRating { methods, family, uc, uc_single_firm: false, ip, assumption }
}

pub const RATINGS: [MethodRating; 11] = {
    use Family::*;
    use Rating::*;
    [
        row("degree, eigenvector, closeness", Centrality, Poor, Poor, "visibility and proximity"),
        row("betweenness, flow betweenness", Centrality, Fair, Good, "brokerage over flows"),
        row("pagerank", FlowBased, Fair, Good, "discounted propagation of importance"),
        row("katz, alpha-icon", FlowBased, Excellent, Fair, "discounted propagation of importance"),
        MethodRating {
            methods: "shapley-shubik, banzhaf, johnston",
            family: GameTheoretic,
            uc: Fair,
            uc_single_firm: true,
            ip: Poor,
            assumption: "pivotality within one firm",
        },
        row("phi, pi, pi-prime", GameTheoretic, Good, Fair, "network-level decisiveness"),
        row("hhi, top-k", Concentration, Good, Poor, "concentration of control"),
        row("ncv, nncv", FlowBased, Good, Fair, "control volume through chains"),
        row("npi", Hybrid, Excellent, Fair, "pivotality across the network"),
        row("npf", Hybrid, Good, Excellent, "intermediaries shaping control flow"),
        row("ic, ccp", Optimization, Good, Good, "cheapest path to control"),
    ]
};

/// Which measure stands for each family.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportConfig {
    /// `degree`, `eigenvector`, `closeness`, `betweenness` or `flow_betweenness`.
    pub centrality: String,
    /// `karos_peters`, `pi` or `pi_prime`.
    pub game: String,
    /// `katz`, `ncv`, `nncv` or `pagerank`.
    pub flow: String,
    pub variant: Variant,
    pub uc_threshold: f64,
    pub simulation: SimulationConfig,
    /// Size of the top sets compared between families.
    pub top_k: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            centrality: "betweenness".into(),
            game: "karos_peters".into(),
            flow: "katz".into(),
            variant: Variant::Ic,
            uc_threshold: DEFAULT_UC_THRESHOLD,
            simulation: SimulationConfig { own_endowment: false, ..Default::default() },
            top_k: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySection {
    pub family: Family,
    pub measure: String,
    /// Whether the measure ranks ultimate controllers at all.
    pub uo_capable: bool,
    pub uc_rating: Rating,
    pub ip_rating: Rating,
    pub scores: BTreeMap<String, f64>,
    pub ranking: Vec<String>,
    /// Highest-scoring person.
    pub uc_top: Option<String>,
    /// Highest-scoring node that both holds and is held.
    pub ip_top: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(skip)]
    pub vector: Option<ScoreVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correlation {
    pub a: Family,
    pub b: Family,
    pub spearman: Option<f64>,
    pub top_k_overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationSummary {
    /// HHI of each firm's identified shareholders.
    pub firm_hhi: BTreeMap<String, f64>,
    pub ultimate_owner: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaxonomyReport {
    pub families: Vec<FamilySection>,
    pub correlations: Vec<Correlation>,
    pub concentration: ConcentrationSummary,
    pub ratings: Vec<MethodRating>,
    pub warnings: Vec<String>,
}

impl TaxonomyReport {
    pub fn section(&self, family: Family) -> Option<&FamilySection> {
        self.families.iter().find(|s| s.family == family)
    }
}

fn intermediary(net: &Network, i: usize) -> bool {
    !net.in_edges(i).is_empty() && !net.out_edges(i).is_empty()
}

fn top_where(sv: &ScoreVector, net: &Network, keep: impl Fn(usize) -> bool) -> Option<String> {
    sv.ranking()
        .into_iter()
        .map(|id| net.index_of(id).expect("score ids come from the network"))
        .find(|&i| keep(i) && sv.values[i] > 0.0)
        .map(|i| net.id(i).to_string())
}

fn best_rating(family: Family, pick: impl Fn(&MethodRating) -> Rating) -> Rating {
    RATINGS.iter().filter(|r| r.family == family).map(pick).max().unwrap_or(Rating::Poor)
}

fn section(net: &Network, family: Family, measure: &str, sv: ScoreVector, ip: Option<&ScoreVector>) -> FamilySection {
    let ip_source = ip.unwrap_or(&sv);
    FamilySection {
        family,
        measure: measure.to_string(),
        uo_capable: matches!(
            family,
            Family::GameTheoretic | Family::Concentration | Family::FlowBased | Family::Hybrid
        ),
        uc_rating: best_rating(family, |r| r.uc),
        ip_rating: best_rating(family, |r| r.ip),
        scores: sv.as_map(),
        ranking: sv.ranking().into_iter().map(str::to_string).collect(),
        uc_top: top_where(&sv, net, |i| net.node(i).kind == NodeKind::Person),
        ip_top: top_where(ip_source, net, |i| intermediary(net, i)),
        skipped: None,
        vector: Some(sv),
    }
}

fn skipped(family: Family, measure: &str, reason: String) -> FamilySection {
    FamilySection {
        family,
        measure: measure.to_string(),
        uo_capable: false,
        uc_rating: best_rating(family, |r| r.uc),
        ip_rating: best_rating(family, |r| r.ip),
        scores: BTreeMap::new(),
        ranking: Vec::new(),
        uc_top: None,
        ip_top: None,
        skipped: Some(reason),
        vector: None,
    }
}

fn centrality_scores(net: &Network, measure: &str) -> Result<ScoreVector> {
    let opts = CentralityOptions::default();
    match measure {
        "degree" => centrality::degree_centrality(net, &opts),
        "eigenvector" => centrality::eigenvector_centrality(net, &opts),
        "closeness" => centrality::closeness_centrality(net, &opts),
        "betweenness" => centrality::betweenness_centrality(net, &opts),
        "flow_betweenness" => centrality::flow_betweenness(net, &opts),
        other => Err(Error::param("centrality", format!("unknown report measure `{other}`"))),
    }
}

fn game_scores(net: &Network, measure: &str) -> Result<ScoreVector> {
    let cs = ControlStructure::new(net.clone())?;
    let profile = match measure {
        "karos_peters" => voting::karos_peters_phi(&cs)?,
        "pi" => voting::mercik_lobos_pi(&cs, PiVariant::Pi)?,
        "pi_prime" => voting::mercik_lobos_pi(&cs, PiVariant::PiPrime)?,
        other => return Err(Error::param("game", format!("unknown report measure `{other}`"))),
    };
    Ok(ScoreVector::new(profile.index, net, profile.values, false))
}

fn flow_scores(net: &Network, measure: &str) -> Result<ScoreVector> {
    match measure {
        "katz" => Ok(flow::katz_influence(net, flow::default_attenuation(net), &SolveOptions::default())?.scores),
        "ncv" => flow::ncv(net),
        "nncv" => flow::nncv(net),
        "pagerank" => flow::pagerank(net, &PropagationOptions::default()),
        other => Err(Error::param("flow", format!("unknown report measure `{other}`"))),
    }
}

/// Number of other nodes each node ultimately controls.
fn control_reach(net: &Network, threshold: f64) -> Result<(ScoreVector, BTreeMap<String, String>)> {
    let owners = concentration::ultimate_control(net, threshold, ChainRule::WeakestLink)?;
    let mut reach = vec![0.0; net.len()];
    let mut map = BTreeMap::new();
    for uo in owners {
        if uo.owner != uo.target {
            reach[net.index_of(&uo.owner)?] += 1.0;
        }
        map.insert(uo.target, uo.owner);
    }
    Ok((ScoreVector::new("control_reach", net, reach, false).with_param("threshold", threshold), map))
}

/// For each firm taken alone as the target, the nodes the cheapest plan
/// must control on the way count once each.
fn acquisition_usage(net: &Network, variant: Variant) -> Result<(ScoreVector, usize)> {
    let mut usage = vec![0.0; net.len()];
    let mut infeasible = 0;
    for t in 0..net.len() {
        if net.node(t).kind != NodeKind::Firm {
            continue;
        }
        let prob = AcquisitionProblem::new(net.clone(), &[net.id(t)], variant)?;
        match optimize::solve_min_cost_control(&prob) {
            Ok(plan) => {
                for (i, &c) in plan.controlled.iter().enumerate() {
                    if c && i != t {
                        usage[i] += 1.0;
                    }
                }
            }
            Err(Error::Infeasible) | Err(Error::SharesUnavailable { .. }) => infeasible += 1,
            Err(e) => return Err(e),
        }
    }
    let sv = ScoreVector::new("acquisition_usage", net, usage, false).with_param("variant", variant.name());
    Ok((sv, infeasible))
}

fn too_large(e: &Error) -> bool {
    matches!(e, Error::TooManyNodes { .. } | Error::TooManyPlayers { .. } | Error::TooLarge { .. })
}

pub fn taxonomy_report(net: &Network, cfg: &ReportConfig) -> Result<TaxonomyReport> {
    if !net.is_ownership() {
        return Err(Error::NotOwnershipNetwork);
    }
    cfg.simulation.validate()?;
    let mut warnings = Vec::new();
    if net.edge_count() == 0 {
        warnings.push("network has no edges; every section is zero".to_string());
    } else if net.values().iter().all(|&v| v == 0.0) {
        warnings.push("all node values are zero; value-based measures are flat".to_string());
    }
    let mut families = Vec::new();

    families.push(section(net, Family::Centrality, &cfg.centrality, centrality_scores(net, &cfg.centrality)?, None));

    families.push(match game_scores(net, &cfg.game) {
        Ok(sv) => section(net, Family::GameTheoretic, &cfg.game, sv, None),
        Err(e) if too_large(&e) => {
            warnings.push(format!("{} skipped: {e}", Family::GameTheoretic.name()));
            skipped(Family::GameTheoretic, &cfg.game, e.to_string())
        }
        Err(e) => return Err(e),
    });

    let (reach, ultimate_owner) = control_reach(net, cfg.uc_threshold)?;
    families.push(section(net, Family::Concentration, "control_reach", reach, None));
    let mut firm_hhi = BTreeMap::new();
    for j in 0..net.len() {
        let holders = net.in_edges(j);
        if holders.is_empty() {
            continue;
        }
        let ids = holders.iter().map(|&(i, _)| net.id(i).to_string()).collect();
        let amounts: Vec<f64> = holders.iter().map(|&(_, w)| w).collect();
        let dist = ShareDistribution::from_amounts(ids, &amounts)?;
        firm_hhi.insert(net.id(j).to_string(), concentration::hhi(&dist)?);
    }

    families.push(section(net, Family::FlowBased, &cfg.flow, flow_scores(net, &cfg.flow)?, None));

    let opt_name = format!("acquisition_usage_{}", cfg.variant.name());
    families.push(if net.len() > MAX_CONTROL_NODES {
        let reason = format!("exact search limited to {MAX_CONTROL_NODES} nodes, got {}", net.len());
        warnings.push(format!("{} skipped: {reason}", Family::Optimization.name()));
        skipped(Family::Optimization, &opt_name, reason)
    } else {
        let (sv, infeasible) = acquisition_usage(net, cfg.variant)?;
        if infeasible > 0 {
            warnings.push(format!("{infeasible} firm(s) cannot be acquired and add no usage"));
        }
        section(net, Family::Optimization, &opt_name, sv, None)
    });

    let npi = hybrid::npi(net, &cfg.simulation)?;
    let npf = hybrid::npf(net, &cfg.simulation)?;
    let hybrid_name = match cfg.simulation.pivot_rule {
        PivotRule::ShapleyOrder => "npi",
        PivotRule::JohnstonSplit => "npi_johnston",
    };
    families.push(section(net, Family::Hybrid, hybrid_name, npi.scores, Some(&npf.intermediary)));

    let mut correlations = Vec::new();
    for (x, a) in families.iter().enumerate() {
        for b in &families[x + 1..] {
            if let (Some(va), Some(vb)) = (&a.vector, &b.vector) {
                let cmp = hybrid::compare_profiles(va, vb, cfg.top_k)?;
                correlations.push(Correlation {
                    a: a.family,
                    b: b.family,
                    spearman: cmp.spearman,
                    top_k_overlap: cmp.top_k_overlap,
                });
            }
        }
    }

    Ok(TaxonomyReport {
        families,
        correlations,
        concentration: ConcentrationSummary { firm_hhi, ultimate_owner },
        ratings: RATINGS.to_vec(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeRecord, NodeRecord};

    fn pyramid() -> Network {
        Network::ownership(
            vec![
                NodeRecord::person("P", 0.0),
                NodeRecord::firm("A", 1.0),
                NodeRecord::firm("B", 1.0),
                NodeRecord::firm("C", 1.0),
            ],
            vec![EdgeRecord::new("P", "A", 1.0), EdgeRecord::new("A", "B", 1.0), EdgeRecord::new("A", "C", 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn sole_owner_pyramid_apex_first() {
        let net = pyramid();
        let report = taxonomy_report(&net, &ReportConfig::default()).unwrap();
        let owner = &report.concentration.ultimate_owner["C"];
        assert_eq!(owner, "P");
        for s in report.families.iter().filter(|s| s.uo_capable) {
            assert_eq!(s.uc_top.as_deref(), Some("P"), "{}", s.measure);
        }
        // NPI discounts each control step, so the apex only ties its vehicle
        for f in [Family::GameTheoretic, Family::Concentration, Family::FlowBased] {
            assert_eq!(report.section(f).unwrap().ranking[0], "P");
        }
        assert_eq!(report.section(Family::Centrality).unwrap().ip_top.as_deref(), Some("A"));
        assert_eq!(report.correlations.len(), 15);
    }

    #[test]
    fn dispersed_owners_give_inverse_count() {
        let mut nodes = vec![NodeRecord::firm("F", 1.0)];
        let mut edges = Vec::new();
        for k in 0..5 {
            let id = format!("p{k}");
            nodes.push(NodeRecord::person(id.clone(), 0.0));
            edges.push(EdgeRecord::new(id, "F", 0.2));
        }
        let net = Network::ownership(nodes, edges).unwrap();
        let report = taxonomy_report(&net, &ReportConfig::default()).unwrap();
        assert!((report.concentration.firm_hhi["F"] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn edgeless_network_is_all_zero() {
        let net = Network::ownership(
            vec![NodeRecord::person("P", 0.0), NodeRecord::firm("F", 2.0)],
            vec![],
        )
        .unwrap();
        let report = taxonomy_report(&net, &ReportConfig::default()).unwrap();
        assert_eq!(report.warnings.len(), 1);
        for s in &report.families {
            assert!(s.scores.values().all(|&v| v == 0.0), "{}", s.measure);
            assert!(s.uc_top.is_none() && s.ip_top.is_none());
        }
        assert!(report.concentration.firm_hhi.is_empty());
    }

    #[test]
    fn ratings_cover_every_family() {
        for f in Family::ALL {
            assert!(RATINGS.iter().any(|r| r.family == f));
        }
        assert_eq!(best_rating(Family::Hybrid, |r| r.ip), Rating::Excellent);
    }
}
