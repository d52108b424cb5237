//! Eight centrality measures on two cliques joined through a hub.
//!
//! `cargo run --example centrality`

use std::path::Path;

use netpower::centrality::{self, CentralityOptions};
use netpower::io::load_network;

pub fn main() -> netpower::Result<()> {
    let edges = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/teams_edges.csv");
    let net = load_network(None, &edges, false, false)?;
    let opts = CentralityOptions::normalized();
    let measures = [
        centrality::degree_centrality(&net, &opts)?,
        centrality::closeness_centrality(&net, &opts)?,
        centrality::eigenvector_centrality(&net, &opts)?,
        centrality::betweenness_centrality(&net, &opts)?,
        centrality::flow_betweenness(&net, &opts)?,
        centrality::walk_betweenness(&net, &opts)?,
        centrality::information_centrality(&net, &opts)?,
        centrality::eccentricity_centrality(&net, &opts)?,
    ];
    print!("{:>6}", "node");
    for m in &measures {
        print!(" {:>12}", truncate(&m.measure));
    }
    println!();
    for id in net.ids() {
        print!("{id:>6}");
        for m in &measures {
            print!(" {:>12.4}", m.get(&id).unwrap_or(f64::NAN));
        }
        println!();
    }
    // the hub is the only bridge, so every path-based measure puts it first
    assert_eq!(measures[3].ranking()[0], "hub");
    Ok(())
}

fn truncate(s: &str) -> &str {
    &s[..s.len().min(12)]
}
