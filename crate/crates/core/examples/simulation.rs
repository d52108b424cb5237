//! Monte Carlo control structures: power index and value flows.
//!
//! `cargo run --release --example simulation`

use std::path::Path;

use netpower::hybrid::{self, PivotRule, SimulationConfig};
use netpower::io::load_network;

pub fn main() -> netpower::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let net = load_network(Some(&dir.join("group_nodes.csv")), &dir.join("group_edges.csv"), true, true)?;
    for rule in [PivotRule::ShapleyOrder, PivotRule::JohnstonSplit] {
        let cfg = SimulationConfig { iterations: 2000, seed: 42, pivot_rule: rule, ..Default::default() };
        let res = hybrid::npi(&net, &cfg)?;
        println!("{rule:?}");
        for id in res.scores.ranking() {
            println!("  {id:<8} {:>8.3}", res.scores.get(id).unwrap());
        }
        println!("  ben pivotal for gamma in {:.1}% of draws", 100.0 * res.frequency("ben", "gamma").unwrap());
    }
    let cfg = SimulationConfig { iterations: 2000, seed: 42, ..Default::default() };
    let flows = hybrid::npf(&net, &cfg)?;
    println!("\nvalue reaching ana: from delta {:.3}, from epsilon {:.3}", flows.get("ana", "delta").unwrap(), flows.get("ana", "epsilon").unwrap());
    println!("top intermediary: {}", flows.intermediary.ranking()[0]);
    Ok(())
}
