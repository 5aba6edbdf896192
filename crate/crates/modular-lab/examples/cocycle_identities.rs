//! Connes cocycles: closed forms, the cocycle identity, the chain rule, and
//! the support relation for non-faithful states.
//!
//! Run with: cargo run --example cocycle_identities

use std::sync::Arc;

use modular_lab::algebra::Algebra;
use modular_lab::cocycles::{
    connes_cocycle, support_flow_relation, verify_chain_rule, verify_cocycle_identity,
};
use modular_lab::states::{make_state, trace_state};
use modular_lab::{C64, CMatrix, Tolerances};

fn main() -> modular_lab::Result<()> {
    let alg = Arc::new(Algebra::full(2, Tolerances::default()));
    let c = |re: f64, im: f64| C64::new(re, im);

    let phi = make_state(&alg, &CMatrix::from_real_diag(&[0.75, 0.25]), "phi")?;
    let tr = trace_state(&alg, "trace");

    // diagonal closed form: u_t = diag((3/2)^it, (1/2)^it)
    let u = connes_cocycle(&phi, &tr, 1.0)?;
    println!(
        "[D phi : D tr]_1 = diag({:.4}{:+.4}i, {:.4}{:+.4}i)",
        u[(0, 0)].re,
        u[(0, 0)].im,
        u[(1, 1)].re,
        u[(1, 1)].im
    );

    // cocycle identity u_{t+s} = u_t sigma_t(u_s), even without commutation
    let plus = CMatrix::from_rows(&[vec![c(0.5, 0.0), c(0.5, 0.0)], vec![c(0.5, 0.0), c(0.5, 0.0)]])?;
    let psi = make_state(&alg, &plus, "psi")?;
    let omega = make_state(&alg, &CMatrix::from_real_diag(&[0.6, 0.4]), "omega")?;
    let r = verify_cocycle_identity(&psi, &omega, 0.37, 0.73)?;
    println!("cocycle identity residual on a non-commuting pair: {r:.2e}");

    // chain rule across three mutually diagonal states
    let rho = make_state(&alg, &CMatrix::from_real_diag(&[0.9, 0.1]), "rho")?;
    let phi2 = make_state(&alg, &CMatrix::from_real_diag(&[0.3, 0.7]), "phi2")?;
    let check = verify_chain_rule(&rho, &phi2, &tr, 1.0)?;
    println!(
        "chain rule (commuting triple): chain {:.2e}, inverse {:.2e}",
        check.chain_residual, check.inverse_residual
    );

    // support relation for a non-faithful numerator
    let pure = make_state(&alg, &CMatrix::from_real_diag(&[1.0, 0.0]), "pure")?;
    let (uu, flow) = support_flow_relation(&pure, &omega, 1.0)?;
    println!("support relation: u u* defect {uu:.2e}, flow defect {flow:.2e}");
    Ok(())
}
