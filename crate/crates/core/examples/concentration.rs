//! Market concentration and ultimate ownership.
//!
//! `cargo run --example concentration`

use std::path::Path;

use netpower::concentration::{self, ChainRule, ShareDistribution, DEFAULT_UC_THRESHOLD};
use netpower::io::load_network;

pub fn main() -> netpower::Result<()> {
    let ids: Vec<String> = ["a", "b", "c", "d", "e"].map(String::from).into();
    let market = ShareDistribution::parse(ids, &["0.35", "0.25", "0.2", "0.15", "0.05"])?;
    println!("HHI           {}", concentration::hhi(&market)?);
    for k in 1..=market.len() {
        println!("top-{k} share   {:.2}", concentration::top_k(&market, k)?);
    }
    let nci = concentration::nci(&market, 0.5)?;
    println!("NCI(0.5)      {}% ({:?})", nci.percent, nci.members);

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let net = load_network(Some(&dir.join("group_nodes.csv")), &dir.join("group_edges.csv"), true, true)?;
    println!("\nultimate owners at {DEFAULT_UC_THRESHOLD}");
    for rule in [ChainRule::WeakestLink, ChainRule::Product] {
        println!("  {rule:?}");
        for uo in concentration::ultimate_control(&net, DEFAULT_UC_THRESHOLD, rule)? {
            if uo.owner != uo.target {
                println!("    {:<8} <- {:<4} via {} (stake {:.3})", uo.target, uo.owner, uo.chain.join(" > "), uo.stake);
            }
        }
    }
    Ok(())
}
