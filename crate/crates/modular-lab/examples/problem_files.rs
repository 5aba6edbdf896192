//! Driving the toolkit through JSON problem files, exactly as the CLI does.
//!
//! Run with: cargo run --example problem_files

use modular_lab::cli::load_problem;
use modular_lab::commutativity::commutes_jointly;

fn main() -> modular_lab::Result<()> {
    let dir = format!("{}/tests/fixtures", env!("CARGO_MANIFEST_DIR"));

    let p = load_problem(&format!("{dir}/diag_family.json"), None, None)?;
    println!(
        "loaded {} states on M_{} (algebra dim {})",
        p.states.len(),
        p.algebra.ambient_dim(),
        p.algebra.dim()
    );
    let v = commutes_jointly(&p.states, &p.grid)?;
    println!("joint verdict: {}", v.commutes);

    // the same dispatch the binary uses, including exit-code semantics
    let argv: Vec<String> = ["modular-lab", "check-joint"]
        .iter()
        .map(|s| s.to_string())
        .chain([format!("{dir}/qubit_counterexample.json")])
        .collect();
    let mut buf = Vec::new();
    let code = modular_lab::cli::run_with_writer(&argv, &mut buf);
    println!("CLI on the counterexample file exits {code} with report:");
    println!("{}", String::from_utf8_lossy(&buf));
    Ok(())
}
