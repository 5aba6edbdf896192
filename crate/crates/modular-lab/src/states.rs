//! Normal states as trace densities inside their algebra.
//!
//! Every state is reduced to a density h in M with phi(x) = tr(h x), the
//! trace being the plain matrix trace restricted to M. The modular flow of a
//! faithful state is x -> h^{it} x h^{-it}; the centralizer is the fixed-point
//! algebra of that flow, equivalently the relative commutant of h in M.

use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::algebra::{self, Algebra};
use crate::error::{Error, Result};
use crate::linalg_core::{
    commutator, herm_eig, herm_map, power_it, psd_power, C64, CMatrix, HermDecomp,
};

/// A normal state on an algebra, stored as its trace density.
#[derive(Debug, Clone)]
pub struct State {
    algebra: Arc<Algebra>,
    density: CMatrix,
    name: String,
}

/// A normal positive functional: a state minus the normalization.
#[derive(Debug, Clone)]
pub struct PositiveFunctional {
    algebra: Arc<Algebra>,
    density: CMatrix,
}

impl Serialize for State {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("State", 2)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("density", &self.density)?;
        st.end()
    }
}

impl State {
    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn density(&self) -> &CMatrix {
        &self.density
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// phi(x) = tr(h x).
    pub fn expect(&self, x: &CMatrix) -> Result<C64> {
        if x.dim() != self.density.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.density.dim(),
                found: x.dim(),
            });
        }
        Ok((&self.density * x).trace())
    }

    pub(crate) fn density_decomp(&self) -> HermDecomp {
        herm_eig(&self.density, self.algebra.tol()).expect("state density is Hermitian")
    }

    /// True iff the smallest density eigenvalue exceeds the rank cutoff.
    pub fn is_faithful(&self) -> bool {
        let cut = self.algebra.tol().eps_rank(self.density.dim());
        self.density_decomp().min_eigenvalue() > cut
    }

    /// Two states live on the same algebra if they share it or the spans agree.
    pub fn same_algebra(&self, other: &State) -> bool {
        if Arc::ptr_eq(&self.algebra, &other.algebra) {
            return true;
        }
        self.algebra.ambient_dim() == other.algebra.ambient_dim()
            && self
                .algebra
                .span_distance(&other.algebra)
                .map(|d| d <= self.algebra.tol().eps_eq)
                .unwrap_or(false)
    }
}

/// Condition an ambient density onto the algebra and wrap it as a state.
pub fn make_state(
    algebra: &Arc<Algebra>,
    ambient_density: &CMatrix,
    name: impl Into<String>,
) -> Result<State> {
    let tol = *algebra.tol();
    if ambient_density.dim() != algebra.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: algebra.ambient_dim(),
            found: ambient_density.dim(),
        });
    }
    let d = herm_eig(&ambient_density.herm_part(), &tol)?;
    if ambient_density.herm_residual() > tol.eps_eq {
        return Err(Error::NonHermitian {
            residual: ambient_density.herm_residual(),
        });
    }
    if d.min_eigenvalue() < -tol.eps_psd {
        return Err(Error::NotPsd {
            min_eigenvalue: d.min_eigenvalue(),
        });
    }
    let tr = ambient_density.trace().re;
    if (tr - 1.0).abs() > tol.eps_eq {
        return Err(Error::NotNormalized { trace: tr });
    }
    let density = algebra.cond_expect(ambient_density)?.herm_part();
    let dd = herm_eig(&density, &tol)?;
    if dd.min_eigenvalue() < -tol.eps_psd {
        return Err(Error::NotPsd {
            min_eigenvalue: dd.min_eigenvalue(),
        });
    }
    Ok(State {
        algebra: Arc::clone(algebra),
        density,
        name: name.into(),
    })
}

/// The normalized trace state h = 1/n.
pub fn trace_state(algebra: &Arc<Algebra>, name: impl Into<String>) -> State {
    let n = algebra.ambient_dim();
    State {
        algebra: Arc::clone(algebra),
        density: CMatrix::identity(n).scale(C64::new(1.0 / n as f64, 0.0)),
        name: name.into(),
    }
}

/// Support projection: the spectral projection of the density onto its
/// positive spectrum.
pub fn support(phi: &State) -> CMatrix {
    let tol = phi.algebra().tol();
    let d = phi.density_decomp();
    d.support(tol.eps_rank(phi.density().dim()))
}

/// Trace-norm distance between the densities of two functionals.
pub fn state_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).trace_norm()
}

/// sigma_t(x) = h^{it} x h^{-it} for a faithful state.
pub fn modular_flow(omega: &State, x: &CMatrix, t: f64) -> Result<CMatrix> {
    let tol = omega.algebra().tol();
    if !omega.is_faithful() {
        return Err(Error::NotFaithful {
            name: omega.name().to_string(),
        });
    }
    let res = omega.algebra().containment_residual(x)?;
    if res > tol.eps_eq * x.op_norm().max(1.0) {
        return Err(Error::NotInAlgebra { residual: res });
    }
    let u = power_it(omega.density(), t, tol)?;
    Ok(&(&u * x) * &u.adjoint())
}

/// Centralizer: {x in M : [x, h] = 0}, computed as M intersected with the
/// commutant of h.
pub fn centralizer(omega: &State) -> Result<Algebra> {
    if !omega.is_faithful() {
        return Err(Error::NotFaithful {
            name: omega.name().to_string(),
        });
    }
    let alg = omega.algebra();
    let n = alg.ambient_dim();
    let tol = alg.tol();
    let h_comm = algebra::commutant_of_set(n, std::slice::from_ref(omega.density()), tol)?;
    let basis = algebra::intersect_spans(n, alg.basis(), &h_comm, tol)?;
    Algebra::from_parts(n, basis, *tol)
}

/// omega_a(x) = omega(a^{1/2} x a^{1/2}), as the functional with density
/// a^{1/2} h a^{1/2}.
pub fn omega_sub_a(omega: &State, a: &CMatrix) -> Result<PositiveFunctional> {
    let tol = omega.algebra().tol();
    let res = omega.algebra().containment_residual(a)?;
    if res > tol.eps_eq * a.op_norm().max(1.0) {
        return Err(Error::NotInAlgebra { residual: res });
    }
    let sqrt_a = psd_power(a, 0.5, tol)?;
    let density = (&(&sqrt_a * omega.density()) * &sqrt_a).herm_part();
    Ok(PositiveFunctional {
        algebra: Arc::clone(omega.algebra()),
        density,
    })
}

impl PositiveFunctional {
    pub fn density(&self) -> &CMatrix {
        &self.density
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    /// Total mass, i.e. the value at the unit.
    pub fn mass(&self) -> f64 {
        self.density.trace().re
    }

    pub fn apply(&self, x: &CMatrix) -> Result<C64> {
        if x.dim() != self.density.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.density.dim(),
                found: x.dim(),
            });
        }
        Ok((&self.density * x).trace())
    }
}

/// Convergence record for the bounded-approximation definition of omega_A.
#[derive(Debug, Clone, Serialize)]
pub struct RegularizationReport {
    pub eps: Vec<f64>,
    /// Trace-norm deviation of omega_{A(1+eps A)^{-1}} from omega_A, per eps.
    pub deviations: Vec<f64>,
    pub monotone_nonincreasing: bool,
}

fn check_centralized(omega: &State, a: &CMatrix) -> Result<()> {
    let tol = omega.algebra().tol();
    if !omega.is_faithful() {
        return Err(Error::NotFaithful {
            name: omega.name().to_string(),
        });
    }
    let res = omega.algebra().containment_residual(a)?;
    if res > tol.eps_eq * a.op_norm().max(1.0) {
        return Err(Error::NotInAlgebra { residual: res });
    }
    let comm = commutator(a, omega.density()).op_norm();
    if comm > tol.eps_eq * a.op_norm().max(1.0) {
        return Err(Error::NotCentralized { residual: comm });
    }
    Ok(())
}

/// omega_A as the limit of omega_{A(1+eps A)^{-1}}: returns the exact
/// functional (density A^{1/2} h A^{1/2}) together with the deviation of each
/// bounded approximant, which must shrink monotonically as eps decreases.
pub fn omega_sub_a_regularized(
    omega: &State,
    a: &CMatrix,
    eps_list: &[f64],
) -> Result<(PositiveFunctional, RegularizationReport)> {
    check_centralized(omega, a)?;
    let tol = omega.algebra().tol();
    for w in eps_list.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::InvalidProblem {
                reason: "eps_list must be strictly decreasing".into(),
            });
        }
    }
    if eps_list.iter().any(|&e| e <= 0.0) {
        return Err(Error::InvalidProblem {
            reason: "eps_list entries must be positive".into(),
        });
    }
    let exact = omega_sub_a(omega, a)?;
    let mut deviations = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let a_eps = herm_map(a, tol, |l| {
            let l = l.max(0.0);
            C64::new(l / (1.0 + eps * l), 0.0)
        })?;
        let approx = omega_sub_a(omega, &a_eps)?;
        deviations.push(state_distance(approx.density(), exact.density()));
    }
    let monotone = deviations.windows(2).all(|w| w[1] <= w[0] + 1e-15);
    Ok((
        exact,
        RegularizationReport {
            eps: eps_list.to_vec(),
            deviations,
            monotone_nonincreasing: monotone,
        },
    ))
}

/// |omega_A((1+A)^{-1/2} x (1+A)^{-1/2}) - omega(A(1+A)^{-1} x)|.
pub fn verify_omega1_identity(omega: &State, a: &CMatrix, x: &CMatrix) -> Result<f64> {
    check_centralized(omega, a)?;
    let tol = omega.algebra().tol();
    let res = omega.algebra().containment_residual(x)?;
    if res > tol.eps_eq * x.op_norm().max(1.0) {
        return Err(Error::NotInAlgebra { residual: res });
    }
    let omega_a = omega_sub_a(omega, a)?;
    let shrink = herm_map(a, tol, |l| C64::new(1.0 / (1.0 + l.max(0.0)).sqrt(), 0.0))?;
    let lhs = omega_a.apply(&(&(&shrink * x) * &shrink))?;
    let weight = herm_map(a, tol, |l| {
        let l = l.max(0.0);
        C64::new(l / (1.0 + l), 0.0)
    })?;
    let rhs = omega.expect(&(&weight * x))?;
    Ok((lhs - rhs).norm())
}

/// Residuals of the midpoint construction: with A the density of rho with
/// respect to omega and a = ((1+A)/2)^{-1}, the state ((rho+omega)/2)_a
/// recovers omega and the cocycle [D omega : D (rho+omega)/2]_t equals a^{it}.
#[derive(Debug, Clone, Serialize)]
pub struct MidpointReport {
    pub residual_state: f64,
    pub residual_cocycle: f64,
}

pub fn verify_midpoint_identity(rho: &State, omega: &State, grid: &[f64]) -> Result<MidpointReport> {
    let tol = *omega.algebra().tol();
    let a_op = crate::commutativity::pt_density(rho, omega, grid)?;
    let a = herm_map(&a_op, &tol, |l| C64::new(2.0 / (1.0 + l.max(0.0)), 0.0))?;
    let mid_density = (rho.density() + omega.density()).scale(C64::new(0.5, 0.0));
    let mid = make_state(omega.algebra(), &mid_density, "midpoint")?;
    let mid_a = omega_sub_a(&mid, &a)?;
    let residual_state = state_distance(mid_a.density(), omega.density());

    let mut residual_cocycle = 0.0f64;
    for &t in grid {
        let u = crate::cocycles::connes_cocycle(omega, &mid, t)?;
        let a_it = power_it(&a, t, &tol)?;
        residual_cocycle = residual_cocycle.max((&u - &a_it).op_norm());
    }
    Ok(MidpointReport {
        residual_state,
        residual_cocycle,
    })
}
