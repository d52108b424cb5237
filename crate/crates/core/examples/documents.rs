//! Runs the command line in-process and checks the document it writes.
//!
//! `cargo run --example documents`

use std::path::Path;

use netpower::cli;
use netpower::io::ResultDocument;

pub fn main() -> netpower::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let args = ["concentration", "ultimate-control", "--graph", "group_edges.csv", "--nodes", "group_nodes.csv"];
    let args: Vec<String> = args.map(String::from).into();
    let outcome = cli::execute(&args, &dir).expect("arguments parse");
    let doc = ResultDocument::from_json(&outcome.document)?;
    println!("{} exited {}", doc.measure, outcome.exit_code);
    for input in &doc.manifest.inputs {
        println!("  {:<6} {} sha256 {}", input.role, input.path, &input.sha256[..16]);
    }
    doc.manifest.verify_inputs(&dir)?;
    // serialization is canonical: parse and print give back the same bytes
    assert_eq!(doc.to_json()?, outcome.document);
    println!("{}", outcome.document);
    Ok(())
}
