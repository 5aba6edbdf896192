//! States as trace densities, modular flow, and centralizers.
//!
//! Run with: cargo run --example modular_flow

use std::sync::Arc;

use modular_lab::algebra::Algebra;
use modular_lab::states::{centralizer, make_state, modular_flow, support, trace_state};
use modular_lab::{default_t_grid, C64, CMatrix, Tolerances};

fn main() -> modular_lab::Result<()> {
    let alg = Arc::new(Algebra::full(2, Tolerances::default()));
    let c = |re: f64, im: f64| C64::new(re, im);

    // the trace state has central density: its flow is trivial
    let tr = trace_state(&alg, "trace");
    let sigma_x =
        CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]])?;
    let moved = modular_flow(&tr, &sigma_x, 1.0)?;
    println!(
        "trace flow moves sigma_x by {:.2e} (identity flow)",
        (&moved - &sigma_x).op_norm()
    );

    // a tilted faithful state rotates off-diagonal entries
    let omega = make_state(&alg, &CMatrix::from_real_diag(&[0.75, 0.25]), "omega")?;
    println!("omega faithful: {}", omega.is_faithful());
    for &t in &default_t_grid()[5..8] {
        let m = modular_flow(&omega, &sigma_x, t)?;
        println!(
            "  sigma_{t:.2}(sigma_x)[0,1] = {:.4} + {:.4}i  (phase 3^it)",
            m[(0, 1)].re,
            m[(0, 1)].im
        );
    }

    // its centralizer is the diagonal masa
    let cent = centralizer(&omega)?;
    println!("centralizer of omega: dim = {}", cent.dim());

    // a pure state is supported on a single ray
    let pure = make_state(&alg, &CMatrix::from_real_diag(&[1.0, 0.0]), "pure")?;
    println!(
        "pure state: faithful = {}, support trace = {:.1}",
        pure.is_faithful(),
        support(&pure).trace().re
    );
    Ok(())
}
