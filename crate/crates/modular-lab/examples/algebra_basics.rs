//! Generated algebras, commutants, centers, and minimal projections.
//!
//! Run with: cargo run --example algebra_basics

use modular_lab::algebra::{center, commutant, generate_algebra, is_abelian, minimal_projections};
use modular_lab::{C64, CMatrix, Tolerances};

fn main() -> modular_lab::Result<()> {
    let tol = Tolerances::default();
    let c = |re: f64, im: f64| C64::new(re, im);

    let sigma_x =
        CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]])?;
    let sigma_z = CMatrix::from_real_diag(&[1.0, -1.0]);

    // W*(sigma_x) is abelian of linear dimension 2
    let wx = generate_algebra(std::slice::from_ref(&sigma_x), 2, &tol)?;
    let (abelian, residual) = is_abelian(&wx);
    println!("W*(sigma_x): dim = {}, abelian = {abelian} (residual {residual:.2e})", wx.dim());

    // adjoining sigma_z generates the full 2x2 algebra
    let full = generate_algebra(&[sigma_x.clone(), sigma_z], 2, &tol)?;
    println!("W*(sigma_x, sigma_z): dim = {}", full.dim());
    println!("its commutant has dim {}", commutant(&full)?.dim());
    println!("its center has dim {}", center(&full)?.dim());

    // minimal projections of the abelian algebra: (1 +- sigma_x)/2
    let atoms = minimal_projections(&wx, 1)?;
    println!("atoms of W*(sigma_x):");
    for (i, p) in atoms.iter().enumerate() {
        println!("  p{i} with trace {:.3}", p.trace().re);
    }

    // the conditional expectation onto the diagonal pinches a matrix
    let diag = modular_lab::algebra::Algebra::diagonal(2, tol);
    let x = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, -1.0)], vec![c(0.5, 0.5), c(-3.0, 0.0)]])?;
    let e = diag.cond_expect(&x)?;
    println!("E_diag(x) = diag({:.1}, {:.1})", e[(0, 0)].re, e[(1, 1)].re);
    Ok(())
}
