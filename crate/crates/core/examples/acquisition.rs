//! Cheapest way to take control of a firm, under each control variant.
//!
//! `cargo run --example acquisition`

use std::path::Path;

use netpower::io::load_network;
use netpower::optimize::{self, AcquisitionProblem, Variant};

pub fn main() -> netpower::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let net = load_network(Some(&dir.join("group_nodes.csv")), &dir.join("group_edges.csv"), true, true)?;
    for variant in Variant::ALL {
        let mut prob = AcquisitionProblem::new(net.clone(), &["delta"], variant)?;
        // the holding company trades at a premium
        prob.set_price("alpha", 3.0)?;
        match optimize::solve_min_cost_control(&prob) {
            Ok(plan) => {
                let buys: Vec<String> = plan
                    .ids
                    .iter()
                    .zip(&plan.purchases)
                    .filter(|(_, &z)| z > 0.0)
                    .map(|(id, z)| format!("{id} {z:.2}"))
                    .collect();
                println!(
                    "{:<4} cost {:.3}  controls {:?}  buys [{}]",
                    variant.name(),
                    plan.total_cost,
                    plan.controlled_ids(),
                    buys.join(", ")
                );
                if let Some(order) = plan.order {
                    println!("     certified in order {}", order.join(" > "));
                }
            }
            Err(e) => println!("{:<4} {e}", variant.name()),
        }
    }
    Ok(())
}
