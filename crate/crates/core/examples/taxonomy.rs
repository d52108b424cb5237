//! One representative measure per family, side by side.
//!
//! `cargo run --release --example taxonomy`

use std::path::Path;

use netpower::io::load_network;
use netpower::report::{self, ReportConfig};

pub fn main() -> netpower::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let net = load_network(Some(&dir.join("group_nodes.csv")), &dir.join("group_edges.csv"), true, true)?;
    let rep = report::taxonomy_report(&net, &ReportConfig::default())?;
    for s in &rep.families {
        println!(
            "{:<15} {:<28} top person {:<6} top intermediary {:<8} ({:?}/{:?})",
            s.family.name(),
            s.measure,
            s.uc_top.as_deref().unwrap_or("-"),
            s.ip_top.as_deref().unwrap_or("-"),
            s.uc_rating,
            s.ip_rating
        );
    }
    println!();
    for c in &rep.correlations {
        let rho = c.spearman.map_or("n/a".to_string(), |r| format!("{r:+.2}"));
        println!("{:<15} vs {:<15} spearman {rho:>6}  top-3 overlap {:.2}", c.a.name(), c.b.name(), c.top_k_overlap);
    }
    for w in &rep.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
