//! The five equivalent pairwise-commutativity conditions evaluated side by
//! side, and the relative density A with phi = omega_A.
//!
//! Run with: cargo run --example pairwise_commutativity

use std::sync::Arc;

use modular_lab::algebra::Algebra;
use modular_lab::commutativity::{commutes_pairwise, pt_density};
use modular_lab::states::{make_state, trace_state};
use modular_lab::{default_t_grid, C64, CMatrix, Tolerances};

fn main() -> modular_lab::Result<()> {
    let alg = Arc::new(Algebra::full(2, Tolerances::default()));
    let grid = default_t_grid();
    let c = |re: f64, im: f64| C64::new(re, im);

    let tr = trace_state(&alg, "trace");
    let tilted = make_state(&alg, &CMatrix::from_real_diag(&[0.75, 0.25]), "tilted")?;
    let plus = make_state(
        &alg,
        &CMatrix::from_rows(&[vec![c(0.5, 0.0), c(0.5, 0.0)], vec![c(0.5, 0.0), c(0.5, 0.0)]])?,
        "plus",
    )?;

    for (phi, omega) in [(&tilted, &tr), (&plus, &tilted)] {
        let v = commutes_pairwise(phi, omega, &grid)?;
        println!(
            "{} against {}: commutes = {} (oracle {:.3})",
            phi.name(),
            omega.name(),
            v.commutes,
            v.oracle_commutator
        );
        for (label, r) in &v.residuals {
            println!("  {label:7} residual {r:.3e}");
        }
    }

    // for the commuting pair, the relative density is diag(3/2, 1/2)
    let a = pt_density(&tilted, &tr, &grid)?;
    println!(
        "relative density of tilted w.r.t. trace: diag({:.2}, {:.2})",
        a[(0, 0)].re,
        a[(1, 1)].re
    );
    Ok(())
}
