//! Broadcast channels for commuting state families.
//!
//! The construction measures the atom of the abelian algebra generated by the
//! densities and prepares the normalized trace state on that atom:
//! K(x (x) y) = sum_j p_j x p_j tr(p_j y)/tr(p_j). Each density is a scalar
//! combination of the atoms, so both marginals reproduce every member state
//! exactly. The channel is encoded in Kraus form and verified through its
//! Choi matrix.
//!
//! `feasibility_search` is an independent cross-check: Dykstra alternating
//! projections between the PSD cone and the affine set cut out by unitality
//! and the marginal constraints, run directly on the Choi matrix. A stalled
//! gap is evidence of infeasibility, not a proof.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::algebra::{generate_algebra, minimal_projections, Algebra};
use crate::commutativity::{commutes_jointly, JointVerdict};
use crate::error::{Error, Result};
use crate::linalg_core::{herm_eig, tensor_product, C64, CMatrix};
use crate::states::State;
use crate::tolerances::Tolerances;

/// Kraus operator mapping the tensor-square space C^{n^2} to C^n.
#[derive(Debug, Clone)]
pub struct KrausOperator {
    pub(crate) inner: DMatrix<C64>,
}

impl KrausOperator {
    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }
}

impl Serialize for KrausOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.inner.nrows())
            .map(|i| {
                (0..self.inner.ncols())
                    .map(|j| [self.inner[(i, j)].re, self.inner[(i, j)].im])
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

/// A unital completely positive map M (x) M -> M in Kraus form.
#[derive(Debug, Clone)]
pub struct Channel {
    kraus: Vec<KrausOperator>,
    base_dim: usize,
    algebra: Arc<Algebra>,
}

impl Serialize for Channel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Channel", 2)?;
        st.serialize_field("kraus", &self.kraus)?;
        st.serialize_field("base_dim", &self.base_dim)?;
        st.end()
    }
}

impl Channel {
    pub fn kraus(&self) -> &[KrausOperator] {
        &self.kraus
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    /// K(z) = sum_k R_k z R_k*.
    pub fn apply(&self, z: &CMatrix) -> Result<CMatrix> {
        let d_in = self.base_dim * self.base_dim;
        if z.dim() != d_in {
            return Err(Error::DimensionMismatch {
                expected: d_in,
                found: z.dim(),
            });
        }
        let mut out = DMatrix::<C64>::zeros(self.base_dim, self.base_dim);
        for r in &self.kraus {
            out += &r.inner * &z.inner * r.inner.adjoint();
        }
        Ok(CMatrix::new_unchecked(out))
    }

    /// K(1 (x) 1) as computed from the Kraus operators.
    pub fn apply_unit(&self) -> CMatrix {
        let mut out = DMatrix::<C64>::zeros(self.base_dim, self.base_dim);
        for r in &self.kraus {
            out += &r.inner * r.inner.adjoint();
        }
        CMatrix::new_unchecked(out)
    }

    /// Choi matrix of the map on the n^2 (x) n space; PSD iff the map is CP.
    pub fn choi(&self) -> CMatrix {
        let n = self.base_dim;
        let d = n * n * n;
        let mut c = DMatrix::<C64>::zeros(d, d);
        for r in &self.kraus {
            let w = DVector::<C64>::from_fn(d, |idx, _| {
                let big_i = idx / n;
                let a = idx % n;
                r.inner[(a, big_i)]
            });
            c += &w * w.adjoint();
        }
        CMatrix::new_unchecked(c)
    }
}

fn guard_family(family: &[State]) -> Result<&State> {
    let first = family.first().ok_or(Error::NoFaithfulState)?;
    for s in family {
        if !s.same_algebra(first) {
            return Err(Error::AlgebraMismatch);
        }
    }
    Ok(first)
}

/// Channel construction for an already-verified jointly commuting family.
fn construct_channel(family: &[State], seed: u64) -> Result<Channel> {
    let alg = Arc::clone(guard_family(family)?.algebra());
    let tol = *alg.tol();
    let n = alg.ambient_dim();
    let densities: Vec<CMatrix> = family.iter().map(|s| s.density().clone()).collect();
    let density_algebra = generate_algebra(&densities, n, &tol)?;
    let atoms = minimal_projections(&density_algebra, seed)?;

    let mut kraus = Vec::new();
    for p in &atoms {
        let tr = p.trace().re;
        let scale = 1.0 / tr.sqrt();
        let decomp = herm_eig(p, &tol)?;
        for (k, &lambda) in decomp.eigenvalues.iter().enumerate() {
            if lambda < 0.5 {
                continue;
            }
            let f = decomp.basis.inner.column(k).into_owned();
            // R[a, b*n + c] = p[a,b] conj(f[c]) / sqrt(tr p)
            let r = DMatrix::<C64>::from_fn(n, n * n, |a, bc| {
                let b = bc / n;
                let c = bc % n;
                p[(a, b)] * f[c].conj() * C64::new(scale, 0.0)
            });
            kraus.push(KrausOperator { inner: r });
        }
    }
    Ok(Channel {
        kraus,
        base_dim: n,
        algebra: alg,
    })
}

/// Broadcast channel for a jointly commuting family containing a faithful
/// state. `seed` drives the generic element of the joint diagonalization.
pub fn broadcast_channel(family: &[State], grid: &[f64], seed: u64) -> Result<Channel> {
    let joint = commutes_jointly(family, grid)?;
    if !joint.commutes {
        return Err(Error::NotJointlyCommuting {
            residual: joint.oracle_max_commutator,
        });
    }
    construct_channel(family, seed)
}

/// Verification record for a channel against a family.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelReport {
    /// max over states and spanning x of both marginal defects.
    pub max_marginal_residual: f64,
    pub unitality_residual: f64,
    pub choi_min_eigenvalue: f64,
    /// Distance of channel outputs from the algebra span (0 on full M_n).
    pub range_residual: f64,
}

/// Check marginals, unitality, complete positivity and range containment.
pub fn verify_channel(channel: &Channel, family: &[State]) -> Result<ChannelReport> {
    let n = channel.base_dim;
    let alg = &channel.algebra;
    let tol = alg.tol();
    let unit = CMatrix::identity(n);

    let mut max_marginal = 0.0f64;
    for rho in family {
        if rho.density().dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rho.density().dim(),
            });
        }
        for x in alg.basis() {
            let first = channel.apply(&tensor_product(x, &unit))?;
            let second = channel.apply(&tensor_product(&unit, x))?;
            let direct = rho.expect(x)?;
            max_marginal = max_marginal.max((rho.expect(&first)? - direct).norm());
            max_marginal = max_marginal.max((rho.expect(&second)? - direct).norm());
        }
    }

    let unitality_residual = (&channel.apply_unit() - &unit).op_norm();

    let choi = channel.choi();
    let choi_min_eigenvalue = herm_eig(&choi, tol)?.min_eigenvalue();

    let range_residual = if alg.dim() == n * n {
        0.0
    } else {
        let mut worst = 0.0f64;
        for x in alg.basis() {
            for y in alg.basis() {
                let out = channel.apply(&tensor_product(x, y))?;
                worst = worst.max(alg.containment_residual(&out)?);
            }
        }
        worst
    };

    Ok(ChannelReport {
        max_marginal_residual: max_marginal,
        unitality_residual,
        choi_min_eigenvalue,
        range_residual,
    })
}

/// Outcome of the broadcastability decision with its certificate.
#[derive(Debug, Clone, Serialize)]
pub struct Broadcastability {
    pub broadcastable: bool,
    pub joint: JointVerdict,
    /// Constructed and verified channel, when broadcastable.
    pub report: Option<ChannelReport>,
    #[serde(skip)]
    pub channel: Option<Channel>,
}

/// A family is broadcastable iff it commutes jointly; the positive
/// certificate is an explicitly verified channel, the negative one the
/// offending density pair inside the joint verdict.
pub fn broadcastable(family: &[State], grid: &[f64], seed: u64) -> Result<Broadcastability> {
    let joint = commutes_jointly(family, grid)?;
    if !joint.commutes {
        return Ok(Broadcastability {
            broadcastable: false,
            joint,
            report: None,
            channel: None,
        });
    }
    let channel = construct_channel(family, seed)?;
    let report = verify_channel(&channel, family)?;
    Ok(Broadcastability {
        broadcastable: true,
        joint,
        report: Some(report),
        channel: Some(channel),
    })
}

/// Result of the Dykstra feasibility search on the Choi matrix.
#[derive(Debug)]
pub enum FeasibilityOutcome {
    Converged {
        channel: Channel,
        gap: f64,
        iterations: usize,
    },
    Stalled {
        gap: f64,
        iterations: usize,
    },
}

/// Hermitian basis of M_n: diagonal units, symmetric and antisymmetric
/// off-diagonal combinations, all HS-normalized.
fn herm_basis(n: usize) -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(CMatrix::from_fn(n, |r, c| {
            if r == i && c == i {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(CMatrix::from_fn(n, |r, c| {
                if (r, c) == (i, j) || (r, c) == (j, i) {
                    C64::new(s, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }));
            out.push(CMatrix::from_fn(n, |r, c| {
                if (r, c) == (i, j) {
                    C64::new(0.0, s)
                } else if (r, c) == (j, i) {
                    C64::new(0.0, -s)
                } else {
                    C64::new(0.0, 0.0)
                }
            }));
        }
    }
    out
}

struct AffineSet {
    constraints: Vec<CMatrix>,
    targets: Vec<f64>,
    gram_pinv: DMatrix<f64>,
}

impl AffineSet {
    fn new(constraints: Vec<CMatrix>, targets: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        let m = constraints.len();
        let gram = DMatrix::<f64>::from_fn(m, m, |i, j| {
            crate::linalg_core::hs_inner(&constraints[i], &constraints[j])
                .map(|z| z.re)
                .unwrap_or(0.0)
        });
        // pseudo-inverse through the complex Hermitian path
        let gram_c = CMatrix::from_fn(m, |i, j| C64::new(gram[(i, j)], 0.0));
        let d = herm_eig(&gram_c, tol)?;
        let lam_max = d.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
        let cutoff = 1e-12 * lam_max.max(1.0);
        let pinv_c = d.map(|l| {
            if l > cutoff {
                C64::new(1.0 / l, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let gram_pinv = DMatrix::<f64>::from_fn(m, m, |i, j| pinv_c[(i, j)].re);
        Ok(AffineSet {
            constraints,
            targets,
            gram_pinv,
        })
    }

    fn residual_vector(&self, c: &CMatrix) -> DVector<f64> {
        DVector::from_fn(self.constraints.len(), |r, _| {
            let val = crate::linalg_core::hs_inner(&self.constraints[r], c)
                .map(|z| z.re)
                .unwrap_or(0.0);
            val - self.targets[r]
        })
    }

    fn project(&self, c: &CMatrix) -> CMatrix {
        let resid = self.residual_vector(c);
        let alpha = &self.gram_pinv * resid;
        let mut out = c.clone();
        for (r, w) in self.constraints.iter().enumerate() {
            out = &out - &w.scale(C64::new(alpha[r], 0.0));
        }
        out
    }
}

fn project_psd(c: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let d = herm_eig(&c.herm_part(), tol)?;
    Ok(d.map(|l| C64::new(l.max(0.0), 0.0)))
}

fn kraus_from_choi(choi: &CMatrix, n: usize, tol: &Tolerances) -> Result<Vec<KrausOperator>> {
    let d = herm_eig(choi, tol)?;
    let lam_max = d.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = 1e-12 * lam_max.max(1.0);
    let mut kraus = Vec::new();
    for (k, &lambda) in d.eigenvalues.iter().enumerate() {
        if lambda <= cutoff {
            continue;
        }
        let w = d.basis.inner.column(k).into_owned();
        let s = lambda.sqrt();
        let r = DMatrix::<C64>::from_fn(n, n * n, |a, big_i| w[big_i * n + a] * C64::new(s, 0.0));
        kraus.push(KrausOperator { inner: r });
    }
    Ok(kraus)
}

/// Dykstra alternating projections between the PSD cone and the affine set of
/// unitality plus marginal constraints, on the Choi matrix. Converges to a
/// channel when the family is broadcastable; a stalled positive gap is a
/// lower-bound witness (not a proof) that no channel exists.
///
/// Restricted to the full algebra in ambient dimension at most 3.
pub fn feasibility_search(
    family: &[State],
    max_iter: usize,
    tol_gap: f64,
) -> Result<FeasibilityOutcome> {
    let first = guard_family(family)?;
    let alg = Arc::clone(first.algebra());
    let n = alg.ambient_dim();
    if n > 3 {
        return Err(Error::DimensionTooLarge { dim: n, max: 3 });
    }
    if alg.dim() != n * n {
        return Err(Error::InvalidProblem {
            reason: "feasibility search runs on the full matrix algebra only".into(),
        });
    }
    let tol = *alg.tol();
    let d = n * n * n;
    let unit_n = CMatrix::identity(n);
    let hb = herm_basis(n);

    let mut constraints = Vec::new();
    let mut targets = Vec::new();
    // unitality: Tr_in C = 1_n
    for y in &hb {
        constraints.push(tensor_product(&CMatrix::identity(n * n), y));
        targets.push(y.trace().re);
    }
    // marginals: tr(h K(x (x) 1)) = tr(h x) = tr(h K(1 (x) x))
    for rho in family {
        for x in &hb {
            let xt = x.transpose();
            let direct = rho.expect(x)?.re;
            constraints.push(tensor_product(&tensor_product(&xt, &unit_n), rho.density()));
            targets.push(direct);
            constraints.push(tensor_product(&tensor_product(&unit_n, &xt), rho.density()));
            targets.push(direct);
        }
    }
    let affine = AffineSet::new(constraints, targets, &tol)?;

    // strictly positive neutral start
    let mut x = CMatrix::identity(d).scale(C64::new(1.0 / n as f64, 0.0));
    let mut correction = CMatrix::zeros(d);
    let mut gap = f64::INFINITY;
    for iter in 1..=max_iter {
        let y = affine.project(&x);
        let w = &y + &correction;
        let x_next = project_psd(&w, &tol)?;
        correction = &w - &x_next;
        x = x_next;

        let psd_of_y = project_psd(&y, &tol)?;
        gap = (&y - &psd_of_y).fro_norm();
        if gap <= tol_gap {
            let kraus = kraus_from_choi(&psd_of_y, n, &tol)?;
            let channel = Channel {
                kraus,
                base_dim: n,
                algebra: alg,
            };
            return Ok(FeasibilityOutcome::Converged {
                channel,
                gap,
                iterations: iter,
            });
        }
    }
    Ok(FeasibilityOutcome::Stalled {
        gap,
        iterations: max_iter,
    })
}

/// Flow stability of the cocycle algebra: sigma_t^omega(R) = R on the grid,
/// measured as the worst containment residual in both flow directions.
pub fn cocycle_algebra_flow_residual(
    family: &[State],
    omega: &State,
    grid: &[f64],
) -> Result<f64> {
    let n = omega.density().dim();
    let tol = omega.algebra().tol();
    let mut gens = Vec::new();
    for rho in family {
        let coc = crate::cocycles::Cocycle::new(rho.clone(), omega.clone())?;
        for &t in grid {
            gens.push(coc.at(t));
        }
    }
    let r_alg = generate_algebra(&gens, n, tol)?;
    let mut worst = 0.0f64;
    for &t in grid {
        for b in r_alg.basis() {
            let forward = crate::states::modular_flow(omega, b, t)?;
            worst = worst.max(r_alg.containment_residual(&forward)?);
            let backward = crate::states::modular_flow(omega, b, -t)?;
            worst = worst.max(r_alg.containment_residual(&backward)?);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::commutativity::{counterexample_family, sampling};
    use crate::linalg_core::{partial_trace, partial_trace_rect, Side};
    use crate::states::{make_state, trace_state};
    use crate::tolerances::{default_t_grid, Tolerances};

    fn full2() -> Arc<Algebra> {
        Arc::new(Algebra::full(2, Tolerances::default()))
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn single_trace_state_channel() {
        let alg = full2();
        let grid = default_t_grid();
        let family = vec![trace_state(&alg, "tr")];
        let ch = broadcast_channel(&family, &grid, 1).unwrap();
        // single atom p = 1: K(x (x) y) = x tr(y) / 2
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        use rand::SeedableRng;
        let x = crate::linalg_core::random_gaussian(2, &mut rng);
        let y = crate::linalg_core::random_gaussian(2, &mut rng);
        let got = ch.apply(&tensor_product(&x, &y)).unwrap();
        let expected = x.scale(y.trace() * C64::new(0.5, 0.0));
        assert!((&got - &expected).op_norm() < 1e-12);
        let rep = verify_channel(&ch, &family).unwrap();
        assert!(rep.max_marginal_residual < 1e-12);
        assert!(rep.unitality_residual < 1e-12);
        assert!(rep.choi_min_eigenvalue >= -1e-12);
    }

    #[test]
    fn diagonal_qubit_family_channel() {
        let alg = full2();
        let grid = default_t_grid();
        let family = vec![
            make_state(&alg, &CMatrix::from_real_diag(&[0.75, 0.25]), "a").unwrap(),
            trace_state(&alg, "tr"),
        ];
        let ch = broadcast_channel(&family, &grid, 1).unwrap();
        // atoms are the diagonal units: the map pinches and prepares
        assert_eq!(ch.kraus().len(), 2);
        let rep = verify_channel(&ch, &family).unwrap();
        assert!(rep.max_marginal_residual <= 1e-12);
        assert!(rep.unitality_residual <= 1e-12);
        assert!(rep.choi_min_eigenvalue >= -1e-12);
    }

    #[test]
    fn shared_eigenbasis_family_channel() {
        let alg = full2();
        let grid = default_t_grid();
        // densities diagonal in the (1, +-1)/sqrt(2) basis
        let id = CMatrix::identity(2);
        let d1 = &id.scale(C64::new(0.5, 0.0)) + &pauli_x().scale(C64::new(0.2, 0.0));
        let d2 = &id.scale(C64::new(0.5, 0.0)) + &pauli_x().scale(C64::new(-0.35, 0.0));
        let family = vec![
            make_state(&alg, &d1, "a").unwrap(),
            make_state(&alg, &d2, "b").unwrap(),
        ];
        let ch = broadcast_channel(&family, &grid, 1).unwrap();
        let rep = verify_channel(&ch, &family).unwrap();
        assert!(rep.max_marginal_residual <= 1e-12);
        // the atoms are (1 +- sigma_x)/2
        let plus = (&id + &pauli_x()).scale(C64::new(0.5, 0.0));
        let proj_out = ch.apply(&tensor_product(&plus, &id)).unwrap();
        assert!((&proj_out - &plus).op_norm() < 1e-10);
    }

    #[test]
    fn deleted_kraus_breaks_unitality() {
        let alg = full2();
        let grid = default_t_grid();
        let family = vec![
            make_state(&alg, &CMatrix::from_real_diag(&[0.75, 0.25]), "a").unwrap(),
            trace_state(&alg, "tr"),
        ];
        let ch = broadcast_channel(&family, &grid, 1).unwrap();
        let broken = Channel {
            kraus: ch.kraus()[1..].to_vec(),
            base_dim: ch.base_dim(),
            algebra: Arc::clone(ch.algebra()),
        };
        let rep = verify_channel(&broken, &family).unwrap();
        assert!(rep.unitality_residual > 0.1);
    }

    #[test]
    fn non_member_state_sees_large_marginal_defect() {
        let alg = full2();
        let grid = default_t_grid();
        let family = vec![
            make_state(&alg, &CMatrix::from_real_diag(&[0.75, 0.25]), "a").unwrap(),
            trace_state(&alg, "tr"),
        ];
        let ch = broadcast_channel(&family, &grid, 1).unwrap();
        let plus_density = CMatrix::from_rows(&[
            vec![C64::new(0.5, 0.0), C64::new(0.5, 0.0)],
            vec![C64::new(0.5, 0.0), C64::new(0.5, 0.0)],
        ])
        .unwrap();
        let outsider = make_state(&alg, &plus_density, "plus").unwrap();
        let rep = verify_channel(&ch, &[outsider]).unwrap();
        assert!(rep.max_marginal_residual > 0.05);
    }

    #[test]
    fn broadcastable_decisions() {
        let grid = default_t_grid();
        let alg = full2();
        let diag_family = vec![
            make_state(&alg, &CMatrix::from_real_diag(&[0.75, 0.25]), "a").unwrap(),
            trace_state(&alg, "tr"),
        ];
        let yes = broadcastable(&diag_family, &grid, 1).unwrap();
        assert!(yes.broadcastable);
        assert!(yes.channel.is_some());
        assert!(yes.report.unwrap().max_marginal_residual <= 1e-9);

        let (_, cx) = counterexample_family().unwrap();
        let no = broadcastable(&cx, &grid, 1).unwrap();
        assert!(!no.broadcastable);
        assert!(no.channel.is_none());
        assert!((no.joint.oracle_max_commutator - 0.5).abs() < 1e-12);
        assert_eq!(
            no.joint.offending_pair,
            Some(("proj0".to_string(), "projplus".to_string()))
        );

        let single = vec![trace_state(&alg, "tr")];
        let yes2 = broadcastable(&single, &grid, 1).unwrap();
        assert!(yes2.broadcastable);
    }

    #[test]
    fn atoms_resolve_and_scalar_decomposition() {
        let alg = full2();
        let _grid = default_t_grid();
        let family = sampling::commuting_family(&alg, 3, 1, "s", 5).unwrap();
        let densities: Vec<CMatrix> = family.iter().map(|s| s.density().clone()).collect();
        let a = generate_algebra(&densities, 2, alg.tol()).unwrap();
        let atoms = minimal_projections(&a, 11).unwrap();
        let mut sum = CMatrix::zeros(2);
        for p in &atoms {
            sum = &sum + p;
        }
        assert!((&sum - &CMatrix::identity(2)).op_norm() <= 1e-10);
        for rho in &family {
            let mut recon = CMatrix::zeros(2);
            for p in &atoms {
                let w = (rho.density() * p).trace().re / p.trace().re;
                recon = &recon + &p.scale(C64::new(w, 0.0));
            }
            assert!((&recon - rho.density()).op_norm() <= 1e-9);
        }
    }

    #[test]
    fn cocycle_algebra_is_flow_stable() {
        let grid = default_t_grid();
        let alg = full2();
        // commuting family
        let fam = sampling::commuting_family(&alg, 3, 0, "c", 8).unwrap();
        let res = cocycle_algebra_flow_residual(&fam, &fam[0], &grid).unwrap();
        assert!(res <= 1e-9, "commuting family flow residual {res}");
        // non-commuting family: the relation still holds
        let (_, cx) = counterexample_family().unwrap();
        let res = cocycle_algebra_flow_residual(&cx, &cx[0], &grid).unwrap();
        assert!(res <= 1e-9, "counterexample flow residual {res}");
    }

    #[test]
    fn choi_consistency_with_apply() {
        let alg = full2();
        let grid = default_t_grid();
        let family = vec![trace_state(&alg, "tr")];
        let ch = broadcast_channel(&family, &grid, 1).unwrap();
        let choi = ch.choi();
        // Tr_in[(z^T (x) 1) C] = K(z) on a random input
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let z = crate::linalg_core::random_gaussian(4, &mut rng);
        let big = &tensor_product(&z.transpose(), &CMatrix::identity(2)) * &choi;
        let via_choi = CMatrix::new_unchecked(partial_trace_rect(&big.inner, 4, 2, Side::First));
        let direct = ch.apply(&z).unwrap();
        assert!((&via_choi - &direct).op_norm() <= 1e-12);
        // and the full-space partial trace helper agrees on the square case
        let pt = partial_trace(&tensor_product(&z, &z), Side::First, 4).unwrap();
        assert!((&pt - &z.scale(z.trace())).op_norm() <= 1e-12);
    }

    #[test]
    fn feasibility_converges_on_commuting_qubit_pair() {
        let alg = full2();
        let family = vec![
            make_state(&alg, &CMatrix::from_real_diag(&[0.75, 0.25]), "a").unwrap(),
            trace_state(&alg, "tr"),
        ];
        match feasibility_search(&family, 5000, 1e-7).unwrap() {
            FeasibilityOutcome::Converged { channel, gap, iterations } => {
                assert!(gap <= 1e-7);
                assert!(iterations <= 5000);
                let rep = verify_channel(&channel, &family).unwrap();
                assert!(rep.max_marginal_residual <= 1e-5, "marginal {}", rep.max_marginal_residual);
                assert!(rep.unitality_residual <= 1e-5);
                assert!(rep.choi_min_eigenvalue >= -1e-9);
            }
            FeasibilityOutcome::Stalled { gap, .. } => panic!("should converge, gap {gap}"),
        }
    }

    #[test]
    fn feasibility_stalls_on_counterexample() {
        let (_, cx) = counterexample_family().unwrap();
        match feasibility_search(&cx, 5000, 1e-7).unwrap() {
            FeasibilityOutcome::Converged { .. } => panic!("theorem predicts infeasibility"),
            FeasibilityOutcome::Stalled { gap, .. } => {
                assert!(gap >= 1e-3, "gap {gap} should stay large");
            }
        }
    }

    #[test]
    fn feasibility_trace_only_family_converges_immediately() {
        let alg = full2();
        let family = vec![trace_state(&alg, "tr")];
        match feasibility_search(&family, 5000, 1e-7).unwrap() {
            FeasibilityOutcome::Converged { gap, iterations, .. } => {
                assert!(gap <= 1e-7);
                assert!(iterations <= 10, "took {iterations} iterations");
            }
            FeasibilityOutcome::Stalled { gap, .. } => panic!("should converge, gap {gap}"),
        }
    }

    #[test]
    fn feasibility_guard_rails() {
        let alg4 = Arc::new(Algebra::full(4, Tolerances::default()));
        let family = vec![trace_state(&alg4, "tr")];
        assert!(matches!(
            feasibility_search(&family, 10, 1e-7),
            Err(Error::DimensionTooLarge { .. })
        ));
    }
}
