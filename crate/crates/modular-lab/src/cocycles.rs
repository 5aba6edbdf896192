//! Connes cocycles [D phi : D omega]_t realized as h_phi^{it} h_omega^{-it}
//! with the kernel convention, plus checks of the cocycle identity, the chain
//! rule with the inverse formula, and the support relation.
//!
//! For non-faithful phi the cocycle is a partial isometry: u_t u_t* equals the
//! support of phi and u_t* u_t is its image under the modular flow.

use crate::error::{Error, Result};
use crate::linalg_core::{commutator, CMatrix, HermDecomp};
use crate::states::{modular_flow, support, State};

/// The map t -> [D phi : D omega]_t for a fixed pair of states.
#[derive(Debug, Clone)]
pub struct Cocycle {
    numerator: State,
    denominator: State,
    num_decomp: HermDecomp,
    den_decomp: HermDecomp,
    cutoff: f64,
}

impl Cocycle {
    pub fn new(numerator: State, denominator: State) -> Result<Self> {
        if !denominator.is_faithful() {
            return Err(Error::NotFaithful {
                name: denominator.name().to_string(),
            });
        }
        if !numerator.same_algebra(&denominator) {
            return Err(Error::AlgebraMismatch);
        }
        let tol = numerator.algebra().tol();
        let cutoff = tol.eps_rank(numerator.density().dim());
        let num_decomp = numerator.density_decomp();
        let den_decomp = denominator.density_decomp();
        Ok(Cocycle {
            numerator,
            denominator,
            num_decomp,
            den_decomp,
            cutoff,
        })
    }

    pub fn numerator(&self) -> &State {
        &self.numerator
    }

    pub fn denominator(&self) -> &State {
        &self.denominator
    }

    /// u_t = h_phi^{it} h_omega^{-it}.
    pub fn at(&self, t: f64) -> CMatrix {
        let a = self.num_decomp.imaginary_power(t, self.cutoff);
        let b = self.den_decomp.imaginary_power(-t, self.cutoff);
        &a * &b
    }
}

/// [D phi : D omega]_t for a faithful omega on the same algebra.
pub fn connes_cocycle(phi: &State, omega: &State, t: f64) -> Result<CMatrix> {
    Ok(Cocycle::new(phi.clone(), omega.clone())?.at(t))
}

/// || u_{t+s} - u_t sigma_t^omega(u_s) ||. The identity holds for every pair,
/// commuting or not.
pub fn verify_cocycle_identity(phi: &State, omega: &State, s: f64, t: f64) -> Result<f64> {
    let u = Cocycle::new(phi.clone(), omega.clone())?;
    let lhs = u.at(t + s);
    let moved = modular_flow(omega, &u.at(s), t)?;
    let rhs = &u.at(t) * &moved;
    Ok((&lhs - &rhs).op_norm())
}

/// Chain-rule residuals. The contract (both residuals below tolerance) is
/// asserted only when the three states commute pairwise; outside that
/// hypothesis the residuals are reported without a contract.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ChainRuleCheck {
    /// || [D rho : D phi]_t - [D rho : D omega]_t [D omega : D phi]_t ||
    pub chain_residual: f64,
    /// || [D omega : D phi]_t - [D phi : D omega]_{-t} ||
    pub inverse_residual: f64,
    /// Density-commutation oracle over the three pairs.
    pub pairwise_commuting: bool,
}

pub fn verify_chain_rule(
    rho: &State,
    phi: &State,
    omega: &State,
    t: f64,
) -> Result<ChainRuleCheck> {
    for f in [phi, omega] {
        if !f.is_faithful() {
            return Err(Error::NotFaithful {
                name: f.name().to_string(),
            });
        }
    }
    let lhs = connes_cocycle(rho, phi, t)?;
    let rhs = &connes_cocycle(rho, omega, t)? * &connes_cocycle(omega, phi, t)?;
    let chain_residual = (&lhs - &rhs).op_norm();
    let inverse_residual =
        (&connes_cocycle(omega, phi, t)? - &connes_cocycle(phi, omega, -t)?).op_norm();

    let eps = omega.algebra().tol().eps_eq;
    let pairs = [(rho, phi), (rho, omega), (phi, omega)];
    let pairwise_commuting = pairs
        .iter()
        .all(|(a, b)| commutator(a.density(), b.density()).op_norm() <= eps);
    Ok(ChainRuleCheck {
        chain_residual,
        inverse_residual,
        pairwise_commuting,
    })
}

/// (|| u_t u_t* - s(phi) ||, || u_t* u_t - sigma_t^omega(s(phi)) ||); both
/// hold unconditionally.
pub fn support_flow_relation(phi: &State, omega: &State, t: f64) -> Result<(f64, f64)> {
    let u = connes_cocycle(phi, omega, t)?;
    let s_phi = support(phi);
    let first = (&(&u * &u.adjoint()) - &s_phi).op_norm();
    let flowed = modular_flow(omega, &s_phi, t)?;
    let second = (&(&u.adjoint() * &u) - &flowed).op_norm();
    Ok((first, second))
}
