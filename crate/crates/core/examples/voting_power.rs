//! Power indices of a weighted vote, then of a whole ownership group.
//!
//! `cargo run --example voting_power`

use std::path::Path;

use netpower::io::load_network;
use netpower::voting::{self, ControlStructure, PiVariant, WeightedVotingGame};

pub fn main() -> netpower::Result<()> {
    // four blocs, quota 6 of 10, weights given exactly
    let players: Vec<String> = ["north", "south", "east", "west"].map(String::from).into();
    let game = WeightedVotingGame::parse_exact(players, &["4", "3", "2", "1"], "6")?;
    let profiles = [
        voting::shapley_shubik(&game)?,
        voting::banzhaf(&game, true)?,
        voting::johnston(&game)?,
    ];
    println!("[6; 4, 3, 2, 1]");
    for p in &profiles {
        let exact: Vec<String> = p.exact.as_ref().unwrap().iter().map(|r| r.to_string()).collect();
        println!("  {:<20} {}", p.index, exact.join("  "));
    }

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let net = load_network(Some(&dir.join("group_nodes.csv")), &dir.join("group_edges.csv"), true, true)?;
    let cs = ControlStructure::new(net)?;
    println!("\nownership group");
    println!("  controlled by ana alone: {:?}", voting::control_closure(&cs, &["ana"])?);
    let phi = voting::karos_peters_phi(&cs)?;
    let pi = voting::mercik_lobos_pi(&cs, PiVariant::Pi)?;
    for (i, id) in phi.players.iter().enumerate() {
        println!("  {id:<8} phi {:>7.4}   pi {:>7.4}", phi.values[i], pi.values[i]);
    }
    Ok(())
}
