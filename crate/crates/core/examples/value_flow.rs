//! Value and influence propagated through holdings.
//!
//! `cargo run --example value_flow`

use std::path::Path;

use netpower::flow::{self, PropagationOptions};
use netpower::io::load_network;
use netpower::numerics::SolveOptions;

pub fn main() -> netpower::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let net = load_network(Some(&dir.join("group_nodes.csv")), &dir.join("group_edges.csv"), true, true)?;
    let ncv = flow::ncv(&net)?;
    let nncv = flow::nncv(&net)?;
    let pr = flow::pagerank(&net, &PropagationOptions::default())?;
    // attenuation 1 reads the Katz matrix as integrated ownership
    let alpha = 1.0;
    let katz = flow::katz_influence(&net, alpha, &SolveOptions::default())?;
    println!(
        "spectral radius {:.4}, default attenuation {:.4}",
        katz.spectral_radius,
        flow::default_attenuation(&net)
    );
    println!("{:<8} {:>9} {:>9} {:>9} {:>9}", "node", "ncv", "nncv", "pagerank", "katz");
    for id in net.ids() {
        println!(
            "{id:<8} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            ncv.get(&id).unwrap(),
            nncv.get(&id).unwrap(),
            pr.get(&id).unwrap(),
            katz.scores.get(&id).unwrap()
        );
    }
    println!("\ncontrollers by cumulative stake");
    for c in flow::alpha_icon_controllers(&net, &PropagationOptions::with_attenuation(alpha), 0.3)? {
        println!("  {:<8} {:<6} {:.3}", c.firm, c.controller.as_deref().unwrap_or("-"), c.stake);
    }
    Ok(())
}
