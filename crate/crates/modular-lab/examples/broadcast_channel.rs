//! Broadcast channels: construction from the atoms of the density algebra,
//! full verification, and the equivalence with joint commutativity.
//!
//! Run with: cargo run --example broadcast_channel

use std::sync::Arc;

use modular_lab::algebra::Algebra;
use modular_lab::broadcasting::{broadcast_channel, broadcastable, verify_channel};
use modular_lab::states::{make_state, trace_state};
use modular_lab::{default_t_grid, CMatrix, Tolerances};

fn main() -> modular_lab::Result<()> {
    let alg = Arc::new(Algebra::full(2, Tolerances::default()));
    let grid = default_t_grid();

    let family = vec![
        make_state(&alg, &CMatrix::from_real_diag(&[0.75, 0.25]), "tilted")?,
        trace_state(&alg, "trace"),
    ];
    let channel = broadcast_channel(&family, &grid, 1)?;
    println!("channel with {} Kraus operators", channel.kraus().len());
    let report = verify_channel(&channel, &family)?;
    println!("  marginal residual   {:.2e}", report.max_marginal_residual);
    println!("  unitality residual  {:.2e}", report.unitality_residual);
    println!("  Choi min eigenvalue {:.2e}", report.choi_min_eigenvalue);

    // broadcastability is decided by joint commutativity, with certificates
    let (_, cx_family) = modular_lab::commutativity::counterexample_family()?;
    let no = broadcastable(&cx_family, &grid, 1)?;
    println!(
        "counterexample family broadcastable: {} (witness {:?}, commutator {:.2})",
        no.broadcastable,
        no.joint.offending_pair,
        no.joint.oracle_max_commutator
    );

    let yes = broadcastable(&family, &grid, 1)?;
    println!(
        "diagonal family broadcastable: {} (verified marginal {:.2e})",
        yes.broadcastable,
        yes.report.unwrap().max_marginal_residual
    );
    Ok(())
}
