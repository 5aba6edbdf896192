//! Joint commutativity of a family, consistency of the definition across
//! faithful anchors, the convexity harness, and the qubit counterexample
//! where pairwise and joint verdicts diverge on a non-convex family.
//!
//! Run with: cargo run --example joint_commutativity

use std::sync::Arc;

use modular_lab::algebra::Algebra;
use modular_lab::commutativity::{
    commutes_jointly, convexity_harness, counterexample_qubit, definition_consistency,
};
use modular_lab::states::make_state;
use modular_lab::{default_t_grid, CMatrix, Tolerances};

fn main() -> modular_lab::Result<()> {
    let alg = Arc::new(Algebra::full(2, Tolerances::default()));
    let grid = default_t_grid();

    // a mutually diagonal family commutes jointly
    let family = vec![
        make_state(&alg, &CMatrix::from_real_diag(&[0.5, 0.5]), "trace")?,
        make_state(&alg, &CMatrix::from_real_diag(&[0.75, 0.25]), "tilted")?,
        make_state(&alg, &CMatrix::from_real_diag(&[0.1, 0.9]), "steep")?,
    ];
    let v = commutes_jointly(&family, &grid)?;
    println!(
        "diagonal family: joint = {}, cocycle algebra dim = {}, oracle {:.1e}",
        v.commutes, v.cocycle_algebra_dim, v.oracle_max_commutator
    );

    // the verdict does not depend on which faithful member anchors it
    let d = definition_consistency(&family, &family[0], &family[1], &grid)?;
    println!("anchor independence: span distance {d:.2e}");

    // convex sampling keeps pairwise and joint verdicts aligned
    let rep = convexity_harness(&family, 10, 42, &grid)?;
    println!(
        "convexity harness: raw ({}, {}), convexified ({}, {})",
        rep.raw_pairwise, rep.raw_joint, rep.convex_pairwise, rep.convex_joint
    );

    // the counterexample family: pairwise true yet joint false, and the
    // divergence disappears after convexification
    let (_, cx) = counterexample_qubit(&grid)?;
    println!("counterexample {{trace, proj0, projplus}}:");
    println!(
        "  raw: pairwise {}, joint {} (offending pair {:?}, commutator {:.2})",
        cx.raw_pairwise, cx.raw_joint, cx.offending_pair, cx.oracle_max_commutator
    );
    println!(
        "  midpoint witness commutator {:.2} (faithful midpoint vs projplus)",
        cx.midpoint_witness_commutator
    );
    println!(
        "  convexified: pairwise {}, joint {}",
        cx.convex_pairwise, cx.convex_joint
    );
    Ok(())
}
