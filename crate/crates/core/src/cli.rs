//! `netpower <family> <measure> [flags]`.
//!
//! Every run writes one result document (see [`crate::io::ResultDocument`])
//! and exits 0 on success, 1 on invalid input, 2 on numerical failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::centrality::{self, CentralityOptions, Direction};
use crate::concentration::{self, ChainRule, ShareDistribution, DEFAULT_UC_THRESHOLD};
use crate::error::{Error, Result};
use crate::flow::{self, PropagationOptions, DEFAULT_ICON_THRESHOLD};
use crate::graph::Network;
use crate::hybrid::{self, PivotRule, SimulationConfig};
use crate::io::{self, num, score_map, ErrorInfo, ResultDocument, RunManifest, Timing};
use crate::optimize::{self, AcquisitionProblem, Variant};
use crate::report::{self, ReportConfig};
use crate::score::ScoreVector;
use crate::voting::{self, ControlStructure, PiVariant, PowerProfile, WeightedVotingGame};

#[derive(Debug, Parser)]
#[command(name = "netpower", version, about = "Structural-power measures over ownership and influence networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// degree, eigenvector, closeness, betweenness, flow-betweenness,
    /// walk-betweenness, information, eccentricity
    Centrality(CentralityArgs),
    /// shapley-shubik, banzhaf, johnston (one game); phi, pi, pi-prime (network)
    Voting(VotingArgs),
    /// hhi, top-k, nci, ultimate-control
    Concentration(ConcentrationArgs),
    /// ncv, nncv, pagerank, katz, alpha-icon
    Flow(FlowArgs),
    /// min-cost, evaluate
    Optimize(OptimizeArgs),
    /// npi, npf
    Hybrid(HybridArgs),
    /// taxonomy
    Report(ReportArgs),
    /// Rerun the command recorded in a result document.
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Edge file with columns source,target,weight.
    #[arg(long)]
    pub graph: Option<String>,
    /// Node file with columns id,kind,value.
    #[arg(long)]
    pub nodes: Option<String>,
    /// Write the result document here instead of stdout.
    #[arg(long)]
    pub out: Option<String>,
    /// Treat weights as ownership shares.
    #[arg(long)]
    pub ownership: bool,
    /// Edges run both ways.
    #[arg(long)]
    pub undirected: bool,
    /// Record wall-clock time in the manifest.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct CentralityArgs {
    /// Measure to compute; see the family's summary line.
    pub measure: String,
    #[command(flatten)]
    pub common: Common,
    /// Scale scores to [0, 1].
    #[arg(long)]
    pub normalized: bool,
    /// Use edge weights instead of 0/1 ties.
    #[arg(long)]
    pub weighted: bool,
    /// both, in or out (degree only).
    #[arg(long, default_value = "both")]
    pub direction: String,
    /// Closeness over reachable nodes only.
    #[arg(long)]
    pub per_component: bool,
}

#[derive(Debug, Args)]
pub struct VotingArgs {
    /// Measure to compute; see the family's summary line.
    pub measure: String,
    #[command(flatten)]
    pub common: Common,
    /// Voting weights, e.g. `49,49,2` or `1/3,2/3`.
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<String>,
    /// Player names, in weight order.
    #[arg(long, value_delimiter = ',')]
    pub players: Vec<String>,
    /// Quota; exact fractions accepted.
    #[arg(long)]
    pub quota: Option<String>,
    /// Firm whose shareholders form the game.
    #[arg(long)]
    pub target: Option<String>,
    /// Banzhaf normalized to sum 1.
    #[arg(long)]
    pub normalized: bool,
}

#[derive(Debug, Args)]
pub struct ConcentrationArgs {
    /// Measure to compute; see the family's summary line.
    pub measure: String,
    #[command(flatten)]
    pub common: Common,
    /// Shares, e.g. `0.6,0.2,0.2` or `3/5,1/5,1/5`.
    #[arg(long, value_delimiter = ',')]
    pub shares: Vec<String>,
    /// Firm whose shareholders form the distribution.
    #[arg(long)]
    pub target: Option<String>,
    /// Number of largest actors for top-k.
    #[arg(long = "top-k")]
    pub top_k: Option<usize>,
    /// Coverage level for the concentration index.
    #[arg(long = "H")]
    pub h: Option<f64>,
    /// Control threshold for ultimate-control.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// weakest-link or product.
    #[arg(long, default_value = "weakest-link")]
    pub rule: String,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    /// Measure to compute; see the family's summary line.
    pub measure: String,
    #[command(flatten)]
    pub common: Common,
    /// PageRank damping, default 0.85.
    #[arg(long)]
    pub damping: Option<f64>,
    /// Katz attenuation, default 0.9/spectral radius.
    #[arg(long)]
    pub attenuation: Option<f64>,
    /// Cumulative stake that confers control (alpha-icon).
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Measure to compute; see the family's summary line.
    pub measure: String,
    #[command(flatten)]
    pub common: Common,
    /// Firms to control.
    #[arg(long, value_delimiter = ',', required = true)]
    pub targets: Vec<String>,
    /// ic, ic2, ic3 or ccp.
    #[arg(long, default_value = "ic")]
    pub variant: String,
    /// Control threshold applied to every node.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Per-node prices, e.g. `A=2,B=0.5`.
    #[arg(long, value_delimiter = ',')]
    pub prices: Vec<String>,
    /// Controlled set to price (evaluate only).
    #[arg(long, value_delimiter = ',')]
    pub controlled: Vec<String>,
    /// Allow purchases beyond the free float.
    #[arg(long)]
    pub no_float_cap: bool,
}

#[derive(Debug, Args)]
pub struct HybridArgs {
    /// Measure to compute; see the family's summary line.
    pub measure: String,
    #[command(flatten)]
    pub common: Common,
    /// Monte Carlo draws.
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    /// Base seed; equal seeds give identical output.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// shapley or johnston.
    #[arg(long, default_value = "shapley")]
    pub pivot_rule: String,
    /// Discount per control step, in (0, 1).
    #[arg(long, default_value_t = hybrid::DEFAULT_D)]
    pub d: f64,
    /// Share needed to control an entity.
    #[arg(long, default_value_t = hybrid::DEFAULT_QUOTA)]
    pub quota: f64,
    /// Leave each node's own value out of its score.
    #[arg(long)]
    pub no_own_endowment: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(default_value = "taxonomy")]
    pub measure: String,
    #[command(flatten)]
    pub common: Common,
    /// Centrality measure for the report.
    #[arg(long, default_value = "betweenness")]
    pub centrality: String,
    /// karos_peters, pi or pi_prime.
    #[arg(long, default_value = "karos_peters")]
    pub game: String,
    /// katz, ncv, nncv or pagerank.
    #[arg(long, default_value = "katz")]
    pub flow: String,
    /// Acquisition variant.
    #[arg(long, default_value = "ic")]
    pub variant: String,
    /// Ultimate-control threshold.
    #[arg(long, default_value_t = DEFAULT_UC_THRESHOLD)]
    pub threshold: f64,
    /// Monte Carlo draws for the hybrid section.
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    /// Seed for the hybrid section.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Size of the top sets compared across families.
    #[arg(long = "top-k", default_value_t = 3)]
    pub top_k: usize,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// A result document written by an earlier run.
    pub document: String,
    /// Write the regenerated document here.
    #[arg(long)]
    pub out: Option<String>,
}

/// What a run produced, before it is written anywhere.
#[derive(Debug)]
pub struct Outcome {
    pub document: String,
    pub exit_code: i32,
    pub out: Option<PathBuf>,
}

/// Parses `args` (without the program name) and runs the command. Relative
/// paths resolve against `base`.
pub fn execute(args: &[String], base: &Path) -> std::result::Result<Outcome, clap::Error> {
    let argv = std::iter::once("netpower".to_string()).chain(args.iter().cloned());
    let cli = Cli::try_parse_from(argv)?;
    Ok(match cli.command {
        Command::Replay(r) => replay(&r, base),
        command => {
            let common = common_of(&command).clone();
            let out = common.out.as_deref().map(|p| io::resolve(base, p));
            let document = run_command(&command, &common, args, base);
            let exit_code = document.exit_code();
            Outcome { document: document.to_json().unwrap_or_default(), exit_code, out }
        }
    })
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args(args: Vec<String>) -> i32 {
    let outcome = match execute(&args, Path::new(".")) {
        Ok(o) => o,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Ok(doc) = ResultDocument::from_json(&outcome.document) {
        if let Some(err) = &doc.error {
            eprintln!("error [{}]: {}", err.code, err.message);
        }
    }
    match &outcome.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.document) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 1;
            }
        }
        None => print!("{}", outcome.document),
    }
    outcome.exit_code
}

fn common_of(command: &Command) -> &Common {
    match command {
        Command::Centrality(a) => &a.common,
        Command::Voting(a) => &a.common,
        Command::Concentration(a) => &a.common,
        Command::Flow(a) => &a.common,
        Command::Optimize(a) => &a.common,
        Command::Hybrid(a) => &a.common,
        Command::Report(a) => &a.common,
        Command::Replay(_) => unreachable!("replay has no common flags"),
    }
}

fn family_and_measure(command: &Command) -> (&'static str, &str) {
    match command {
        Command::Centrality(a) => ("centrality", &a.measure),
        Command::Voting(a) => ("voting", &a.measure),
        Command::Concentration(a) => ("concentration", &a.measure),
        Command::Flow(a) => ("flow", &a.measure),
        Command::Optimize(a) => ("optimize", &a.measure),
        Command::Hybrid(a) => ("hybrid", &a.measure),
        Command::Report(a) => ("report", &a.measure),
        Command::Replay(_) => ("replay", ""),
    }
}

/// Arguments worth replaying: everything but where the output went and
/// whether it was timed.
fn recorded_command(args: &[String]) -> Vec<String> {
    let mut kept = Vec::new();
    let mut skip_next = false;
    for a in args {
        if skip_next {
            skip_next = false;
        } else if a == "--out" {
            skip_next = true;
        } else if a == "--timing" || a.starts_with("--out=") {
        } else {
            kept.push(a.clone());
        }
    }
    kept
}

/// Accumulates parameters and produces the document.
struct Run {
    manifest: RunManifest,
    measure: String,
    parameters: BTreeMap<String, Value>,
    started: Instant,
    timing: bool,
}

impl Run {
    fn param(&mut self, name: &str, value: Value) {
        let text = match &value {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        self.manifest.parameters.insert(name.to_string(), text);
        self.parameters.insert(name.to_string(), value);
    }

    fn finish(mut self, result: Result<(Value, Option<Value>)>) -> ResultDocument {
        if self.timing {
            self.manifest.timing = Some(Timing { elapsed_ms: self.started.elapsed().as_secs_f64() * 1e3 });
        }
        let (scores, details, error) = match result {
            Ok((s, d)) => (s, d, None),
            Err(e) => (Value::Null, None, Some(ErrorInfo::from(&e))),
        };
        ResultDocument { manifest: self.manifest, measure: self.measure, parameters: self.parameters, scores, details, error }
    }
}

fn run_command(command: &Command, common: &Common, args: &[String], base: &Path) -> ResultDocument {
    let (family, measure) = family_and_measure(command);
    let mut run = Run {
        manifest: RunManifest::new(recorded_command(args)),
        measure: format!("{family}/{measure}"),
        parameters: BTreeMap::new(),
        started: Instant::now(),
        timing: common.timing,
    };
    let result = dispatch(command, common, base, &mut run);
    run.finish(result)
}

type Payload = (Value, Option<Value>);

fn dispatch(command: &Command, common: &Common, base: &Path, run: &mut Run) -> Result<Payload> {
    match command {
        Command::Centrality(a) => run_centrality(a, common, base, run),
        Command::Voting(a) => run_voting(a, common, base, run),
        Command::Concentration(a) => run_concentration(a, common, base, run),
        Command::Flow(a) => run_flow(a, common, base, run),
        Command::Optimize(a) => run_optimize(a, common, base, run),
        Command::Hybrid(a) => run_hybrid(a, common, base, run),
        Command::Report(a) => run_report(a, common, base, run),
        Command::Replay(_) => unreachable!("handled before dispatch"),
    }
}

/// Loads the network named by the shared flags, recording input digests.
fn network(common: &Common, base: &Path, run: &mut Run, ownership: bool) -> Result<Network> {
    let graph = common.graph.as_deref().ok_or_else(|| Error::Usage("--graph is required".into()))?;
    let graph_path = io::resolve(base, graph);
    run.manifest.add_input("graph", graph, &graph_path)?;
    let nodes_path = match common.nodes.as_deref() {
        Some(n) => {
            let p = io::resolve(base, n);
            run.manifest.add_input("nodes", n, &p)?;
            Some(p)
        }
        None => None,
    };
    let ownership = ownership || common.ownership;
    run.param("ownership", json!(ownership));
    run.param("directed", json!(!common.undirected));
    io::load_network(nodes_path.as_deref(), &graph_path, ownership, !common.undirected)
}

fn score_payload(sv: &ScoreVector, run: &mut Run) -> Payload {
    run.param("normalized", json!(sv.normalized));
    for (k, v) in &sv.parameters {
        run.param(k, serde_json::from_str(v).unwrap_or_else(|_| json!(v)));
    }
    (score_map(&sv.ids, &sv.values), None)
}

fn profile_payload(p: &PowerProfile) -> Payload {
    let mut details = serde_json::Map::new();
    details.insert("index".into(), json!(p.index));
    if let Some(raw) = &p.raw_values {
        details.insert("raw_values".into(), score_map(&p.players, raw));
    }
    if let Some(exact) = &p.exact {
        details.insert(
            "exact".into(),
            Value::Object(p.players.iter().cloned().zip(exact.iter().map(|r| json!(r.to_string()))).collect()),
        );
    }
    (score_map(&p.players, &p.values), Some(Value::Object(details)))
}

fn run_centrality(a: &CentralityArgs, common: &Common, base: &Path, run: &mut Run) -> Result<Payload> {
    let direction = match a.direction.as_str() {
        "both" => Direction::Both,
        "in" => Direction::In,
        "out" => Direction::Out,
        other => return Err(Error::param("direction", format!("expected both, in or out, got `{other}`"))),
    };
    run.param("direction", json!(a.direction));
    run.param("per_component", json!(a.per_component));
    let opts = CentralityOptions {
        normalized: a.normalized,
        weighted: a.weighted,
        direction,
        per_component: a.per_component,
        ..Default::default()
    };
    let net = network(common, base, run, false)?;
    let sv = match a.measure.as_str() {
        "degree" => centrality::degree_centrality(&net, &opts),
        "eigenvector" => centrality::eigenvector_centrality(&net, &opts),
        "closeness" => centrality::closeness_centrality(&net, &opts),
        "betweenness" => centrality::betweenness_centrality(&net, &opts),
        "flow-betweenness" => centrality::flow_betweenness(&net, &opts),
        "walk-betweenness" => centrality::walk_betweenness(&net, &opts),
        "information" => centrality::information_centrality(&net, &opts),
        "eccentricity" => centrality::eccentricity_centrality(&net, &opts),
        other => Err(Error::Usage(format!("unknown centrality measure `{other}`"))),
    }?;
    Ok(score_payload(&sv, run))
}

fn single_game(a: &VotingArgs, common: &Common, base: &Path, run: &mut Run) -> Result<WeightedVotingGame> {
    if let Some(target) = &a.target {
        let net = network(common, base, run, true)?;
        let holders = net.shareholders_of(target)?;
        let quota = a.quota.as_deref().map(voting::parse_rational).transpose()?;
        let quota = quota.map_or(voting::DEFAULT_CONTROL_QUOTA, |q| voting::rat_to_f64(&q));
        run.param("target", json!(target));
        run.param("quota", num(quota));
        let (players, weights) = holders.into_iter().unzip();
        return WeightedVotingGame::new(players, weights, quota);
    }
    if a.weights.is_empty() {
        return Err(Error::Usage("give --weights (with --quota) or --graph with --target".into()));
    }
    let quota = a.quota.as_deref().ok_or_else(|| Error::Usage("--quota is required with --weights".into()))?;
    let players = if a.players.is_empty() {
        (1..=a.weights.len()).map(|i| i.to_string()).collect()
    } else {
        a.players.clone()
    };
    run.param("weights", json!(a.weights));
    run.param("quota", json!(quota));
    let weights: Vec<&str> = a.weights.iter().map(String::as_str).collect();
    WeightedVotingGame::parse_exact(players, &weights, quota)
}

fn run_voting(a: &VotingArgs, common: &Common, base: &Path, run: &mut Run) -> Result<Payload> {
    let profile = match a.measure.as_str() {
        "shapley-shubik" => voting::shapley_shubik(&single_game(a, common, base, run)?)?,
        "banzhaf" => {
            run.param("normalized", json!(a.normalized));
            voting::banzhaf(&single_game(a, common, base, run)?, a.normalized)?
        }
        "johnston" => voting::johnston(&single_game(a, common, base, run)?)?,
        "phi" | "pi" | "pi-prime" => {
            let net = network(common, base, run, true)?;
            let quota = match a.quota.as_deref() {
                Some(q) => voting::rat_to_f64(&voting::parse_rational(q)?),
                None => voting::DEFAULT_CONTROL_QUOTA,
            };
            run.param("quota", num(quota));
            let cs = ControlStructure::with_quota(net, quota)?;
            match a.measure.as_str() {
                "phi" => voting::karos_peters_phi(&cs)?,
                "pi" => voting::mercik_lobos_pi(&cs, PiVariant::Pi)?,
                _ => voting::mercik_lobos_pi(&cs, PiVariant::PiPrime)?,
            }
        }
        other => return Err(Error::Usage(format!("unknown voting measure `{other}`"))),
    };
    Ok(profile_payload(&profile))
}

fn distribution(a: &ConcentrationArgs, common: &Common, base: &Path, run: &mut Run) -> Result<ShareDistribution> {
    if let Some(target) = &a.target {
        let net = network(common, base, run, true)?;
        let holders = net.shareholders_of(target)?;
        run.param("target", json!(target));
        let (ids, amounts): (Vec<String>, Vec<f64>) = holders.into_iter().unzip();
        return ShareDistribution::from_amounts(ids, &amounts);
    }
    if a.shares.is_empty() {
        return Err(Error::Usage("give --shares or --graph with --target".into()));
    }
    run.param("shares", json!(a.shares));
    let ids = (1..=a.shares.len()).map(|i| i.to_string()).collect();
    let shares: Vec<&str> = a.shares.iter().map(String::as_str).collect();
    ShareDistribution::parse(ids, &shares)
}

fn run_concentration(a: &ConcentrationArgs, common: &Common, base: &Path, run: &mut Run) -> Result<Payload> {
    match a.measure.as_str() {
        "hhi" => {
            let dist = distribution(a, common, base, run)?;
            let details = concentration::hhi_exact(&dist).map(|r| json!({ "exact": r.to_string() }));
            Ok((json!({ "hhi": num(concentration::hhi(&dist)?) }), details))
        }
        "top-k" => {
            let k = a.top_k.ok_or_else(|| Error::Usage("--top-k is required".into()))?;
            run.param("k", json!(k));
            let dist = distribution(a, common, base, run)?;
            Ok((json!({ "top_k": num(concentration::top_k(&dist, k)?) }), None))
        }
        "nci" => {
            let h = a.h.ok_or_else(|| Error::Usage("--H is required".into()))?;
            run.param("H", num(h));
            let dist = distribution(a, common, base, run)?;
            let r = concentration::nci(&dist, h)?;
            Ok((
                json!({ "nci": num(r.percent) }),
                Some(json!({ "members": r.members, "covered": num(r.covered) })),
            ))
        }
        "ultimate-control" => {
            let threshold = a.threshold.unwrap_or(DEFAULT_UC_THRESHOLD);
            let rule: ChainRule = a.rule.parse()?;
            run.param("threshold", num(threshold));
            run.param("rule", json!(a.rule));
            let net = network(common, base, run, true)?;
            let owners = concentration::ultimate_control(&net, threshold, rule)?;
            let scores = owners.iter().map(|u| (u.target.clone(), num(u.stake))).collect();
            let details = serde_json::to_value(&owners).map_err(|e| Error::Usage(e.to_string()))?;
            Ok((Value::Object(scores), Some(details)))
        }
        other => Err(Error::Usage(format!("unknown concentration measure `{other}`"))),
    }
}

fn run_flow(a: &FlowArgs, common: &Common, base: &Path, run: &mut Run) -> Result<Payload> {
    let mut opts = PropagationOptions::default();
    if let Some(d) = a.damping {
        opts.damping = d;
    }
    opts.attenuation = a.attenuation;
    match a.measure.as_str() {
        "ncv" => Ok(score_payload(&flow::ncv(&network(common, base, run, true)?)?, run)),
        "nncv" => Ok(score_payload(&flow::nncv(&network(common, base, run, true)?)?, run)),
        "pagerank" => Ok(score_payload(&flow::pagerank(&network(common, base, run, false)?, &opts)?, run)),
        "katz" => {
            let net = network(common, base, run, false)?;
            let alpha = a.attenuation.unwrap_or_else(|| flow::default_attenuation(&net));
            let k = flow::katz_influence(&net, alpha, &opts.solve)?;
            run.param("spectral_radius", num(k.spectral_radius));
            let payload = score_payload(&k.scores, run);
            Ok((payload.0, Some(json!({ "ids": k.scores.ids, "matrix": io::matrix_value(&k.matrix) }))))
        }
        "alpha-icon" => {
            let net = network(common, base, run, true)?;
            let threshold = a.threshold.unwrap_or(DEFAULT_ICON_THRESHOLD);
            let alpha = a.attenuation.unwrap_or_else(|| flow::default_attenuation(&net));
            opts.attenuation = Some(alpha);
            run.param("attenuation", num(alpha));
            run.param("threshold", num(threshold));
            let controls = flow::alpha_icon_controllers(&net, &opts, threshold)?;
            let scores = controls.iter().map(|c| (c.firm.clone(), num(c.stake))).collect();
            let details = serde_json::to_value(&controls).map_err(|e| Error::Usage(e.to_string()))?;
            Ok((Value::Object(scores), Some(details)))
        }
        other => Err(Error::Usage(format!("unknown flow measure `{other}`"))),
    }
}

fn run_optimize(a: &OptimizeArgs, common: &Common, base: &Path, run: &mut Run) -> Result<Payload> {
    let variant: Variant = a.variant.parse()?;
    run.param("variant", json!(variant.name()));
    run.param("targets", json!(a.targets));
    run.param("float_cap", json!(!a.no_float_cap));
    let net = network(common, base, run, true)?;
    let targets: Vec<&str> = a.targets.iter().map(String::as_str).collect();
    let mut prob = AcquisitionProblem::new(net.clone(), &targets, variant)?;
    prob.cap_to_free_float = !a.no_float_cap;
    if let Some(alpha) = a.alpha {
        run.param("alpha", num(alpha));
        for id in net.ids() {
            prob.set_threshold(&id, alpha)?;
        }
    }
    for spec in &a.prices {
        let (id, price) = spec
            .split_once('=')
            .ok_or_else(|| Error::param("prices", format!("expected id=price, got `{spec}`")))?;
        let price: f64 = price.trim().parse().map_err(|_| Error::param("prices", format!("bad price in `{spec}`")))?;
        prob.set_price(id.trim(), price)?;
    }
    if !a.prices.is_empty() {
        run.param("prices", json!(a.prices));
    }
    let plan = match a.measure.as_str() {
        "min-cost" => optimize::solve_min_cost_control(&prob)?,
        "evaluate" => {
            run.param("controlled", json!(a.controlled));
            let controlled: Vec<&str> = a.controlled.iter().map(String::as_str).collect();
            optimize::evaluate_plan(&prob, &controlled)?
        }
        other => return Err(Error::Usage(format!("unknown optimize measure `{other}`"))),
    };
    Ok((
        score_map(&plan.ids, &plan.purchases),
        Some(json!({
            "total_cost": num(plan.total_cost),
            "controlled": plan.controlled_ids(),
            "order": plan.order,
        })),
    ))
}

fn run_hybrid(a: &HybridArgs, common: &Common, base: &Path, run: &mut Run) -> Result<Payload> {
    let pivot_rule: PivotRule = a.pivot_rule.parse()?;
    let cfg = SimulationConfig {
        iterations: a.iterations,
        d: a.d,
        quota: a.quota,
        seed: a.seed,
        pivot_rule,
        own_endowment: !a.no_own_endowment,
    };
    run.manifest.seed = Some(a.seed);
    cfg.validate()?;
    let net = network(common, base, run, true)?;
    match a.measure.as_str() {
        "npi" => {
            let r = hybrid::with_pool(|| hybrid::npi(&net, &cfg))?;
            let payload = score_payload(&r.scores, run);
            Ok((payload.0, Some(json!({ "ids": r.scores.ids, "pivot_frequency": io::matrix_value(&r.pivot_frequency) }))))
        }
        "npf" => {
            let r = hybrid::with_pool(|| hybrid::npf(&net, &cfg))?;
            let payload = score_payload(&r.intermediary, run);
            Ok((payload.0, Some(json!({ "ids": r.ids, "flow": io::matrix_value(&r.matrix) }))))
        }
        other => Err(Error::Usage(format!("unknown hybrid measure `{other}`"))),
    }
}

fn run_report(a: &ReportArgs, common: &Common, base: &Path, run: &mut Run) -> Result<Payload> {
    if a.measure != "taxonomy" {
        return Err(Error::Usage(format!("unknown report `{}`", a.measure)));
    }
    let mut cfg = ReportConfig {
        centrality: a.centrality.clone(),
        game: a.game.clone(),
        flow: a.flow.clone(),
        variant: a.variant.parse()?,
        uc_threshold: a.threshold,
        top_k: a.top_k,
        ..Default::default()
    };
    cfg.simulation.iterations = a.iterations;
    cfg.simulation.seed = a.seed;
    run.manifest.seed = Some(a.seed);
    for (k, v) in [("centrality", &a.centrality), ("game", &a.game), ("flow", &a.flow), ("variant", &a.variant)] {
        run.param(k, json!(v));
    }
    run.param("threshold", num(a.threshold));
    run.param("iterations", json!(a.iterations));
    run.param("top_k", json!(a.top_k));
    let net = network(common, base, run, true)?;
    let report = hybrid::with_pool(|| report::taxonomy_report(&net, &cfg))?;
    let scores = report.families.iter().map(|s| (s.family.name().to_string(), json!(s.scores))).collect();
    let details = serde_json::to_value(&report).map_err(|e| Error::Usage(e.to_string()))?;
    Ok((Value::Object(scores), Some(details)))
}

fn replay(r: &ReplayArgs, base: &Path) -> Outcome {
    let out = r.out.as_deref().map(|p| io::resolve(base, p));
    let doc_path = io::resolve(base, &r.document);
    let fail = |e: Error| {
        let mut run = Run {
            manifest: RunManifest::new(vec!["replay".into(), r.document.clone()]),
            measure: "replay".into(),
            parameters: BTreeMap::new(),
            started: Instant::now(),
            timing: false,
        };
        run.param("document", json!(r.document));
        let doc = run.finish(Err(e));
        Outcome { exit_code: doc.exit_code(), document: doc.to_json().unwrap_or_default(), out: out.clone() }
    };
    let text = match std::fs::read_to_string(&doc_path) {
        Ok(t) => t,
        Err(e) => return fail(Error::Io { path: doc_path.display().to_string(), message: e.to_string() }),
    };
    let recorded = match ResultDocument::from_json(&text) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let doc_dir = doc_path.parent().map(Path::to_path_buf).unwrap_or_else(|| base.to_path_buf());
    if let Err(e) = recorded.manifest.verify_inputs(&doc_dir) {
        return fail(e);
    }
    match execute(&recorded.manifest.command, &doc_dir) {
        Ok(o) => Outcome { out, ..o },
        Err(e) => fail(Error::Usage(e.to_string())),
    }
}
