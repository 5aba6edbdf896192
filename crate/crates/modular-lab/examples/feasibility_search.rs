//! Independent cross-check of broadcastability: Dykstra alternating
//! projections between the PSD cone and the marginal constraints on the Choi
//! matrix. Converges on commuting families, stalls on the counterexample.
//!
//! Run with: cargo run --release --example feasibility_search

use std::sync::Arc;

use modular_lab::algebra::Algebra;
use modular_lab::broadcasting::{feasibility_search, verify_channel, FeasibilityOutcome};
use modular_lab::commutativity::counterexample_family;
use modular_lab::states::{make_state, trace_state};
use modular_lab::{CMatrix, Tolerances};

fn main() -> modular_lab::Result<()> {
    let alg = Arc::new(Algebra::full(2, Tolerances::default()));

    let commuting = vec![
        make_state(&alg, &CMatrix::from_real_diag(&[0.75, 0.25]), "tilted")?,
        trace_state(&alg, "trace"),
    ];
    match feasibility_search(&commuting, 5000, 1e-7)? {
        FeasibilityOutcome::Converged {
            channel,
            gap,
            iterations,
        } => {
            let rep = verify_channel(&channel, &commuting)?;
            println!(
                "commuting family: converged in {iterations} iterations, gap {gap:.2e}, marginal {:.2e}",
                rep.max_marginal_residual
            );
        }
        FeasibilityOutcome::Stalled { gap, iterations } => {
            println!("commuting family: stalled at {gap:.2e} after {iterations} (unexpected)");
        }
    }

    let (_, cx) = counterexample_family()?;
    match feasibility_search(&cx, 5000, 1e-7)? {
        FeasibilityOutcome::Converged { gap, .. } => {
            println!("counterexample: converged with gap {gap:.2e} (unexpected)");
        }
        FeasibilityOutcome::Stalled { gap, iterations } => {
            println!(
                "counterexample: stalled at gap {gap:.2e} after {iterations} iterations, \
                 consistent with infeasibility"
            );
        }
    }
    Ok(())
}
