//! The functionals omega_a and omega_A, the bounded-approximation limit, the
//! associated exchange identity, and the midpoint construction.
//!
//! Run with: cargo run --example regularized_functionals

use std::sync::Arc;

use modular_lab::algebra::Algebra;
use modular_lab::states::{
    make_state, omega_sub_a, omega_sub_a_regularized, trace_state, verify_midpoint_identity,
    verify_omega1_identity,
};
use modular_lab::{default_t_grid, CMatrix, Tolerances};

fn main() -> modular_lab::Result<()> {
    let alg = Arc::new(Algebra::full(2, Tolerances::default()));
    let tr = trace_state(&alg, "trace");

    // omega_a with a = diag(2, 0) concentrates all mass on the first ray
    let a = CMatrix::from_real_diag(&[2.0, 0.0]);
    let f = omega_sub_a(&tr, &a)?;
    println!("omega_a density = diag({:.1}, {:.1}), mass {:.1}", f.density()[(0, 0)].re, f.density()[(1, 1)].re, f.mass());

    // omega_A as the limit of bounded approximants A(1+eps A)^{-1}
    let a = CMatrix::from_real_diag(&[3.0, 1.0]);
    let eps = [1e-1, 1e-2, 1e-3, 1e-4];
    let (_, report) = omega_sub_a_regularized(&tr, &a, &eps)?;
    println!("regularization deviations (must shrink monotonically):");
    for (e, d) in report.eps.iter().zip(report.deviations.iter()) {
        println!("  eps = {e:.0e}: deviation {d:.3e}");
    }
    println!("monotone: {}", report.monotone_nonincreasing);

    // the exchange identity ties omega_A to omega through A(1+A)^{-1}
    let x = CMatrix::from_rows(&[
        vec![modular_lab::C64::new(0.2, 0.1), modular_lab::C64::new(1.0, -0.3)],
        vec![modular_lab::C64::new(-0.4, 0.8), modular_lab::C64::new(0.9, 0.0)],
    ])?;
    let r = verify_omega1_identity(&tr, &a, &x)?;
    println!("exchange identity residual: {r:.2e}");

    // midpoint construction: omega = ((rho+omega)/2)_a with a = ((1+A)/2)^{-1}
    let rho = make_state(&alg, &CMatrix::from_real_diag(&[1.0, 0.0]), "rho")?;
    let rep = verify_midpoint_identity(&rho, &tr, &default_t_grid())?;
    println!(
        "midpoint identity: state residual {:.2e}, cocycle residual {:.2e}",
        rep.residual_state, rep.residual_cocycle
    );
    Ok(())
}
