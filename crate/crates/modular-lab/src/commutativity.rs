//! Pairwise and joint commutativity verdicts with full cross-checking.
//!
//! A pairwise verdict evaluates five equivalent conditions — flow invariance,
//! cocycles in the centralizer, the cocycle group law, existence of the
//! relative density, and mutual commutation of the cocycle family — plus a
//! finite-dimensional oracle (the plain density commutator). The conditions
//! must agree unanimously; disagreement raises `EquivalenceViolation`, never
//! a mathematical outcome.
//!
//! The continuum quantifier "for all t" is realized as the default ten-point
//! grid together with the density oracle; in finite dimension the two agree
//! outside a measure-zero set of spectra, and unanimity is enforced.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{generate_algebra, is_abelian, Algebra};
use crate::cocycles::Cocycle;
use crate::error::{Error, Result};
use crate::linalg_core::{commutator, herm_eig, C64, CMatrix};
use crate::states::{make_state, state_distance, State};

/// Verdict on one (state, faithful base) pair.
#[derive(Debug, Clone, Serialize)]
pub struct PairVerdict {
    pub commutes: bool,
    /// Residual per condition label: PT-i .. PT-iv and comm1.
    pub residuals: BTreeMap<String, f64>,
    /// Finite-dimensional oracle: ||[h_phi, h_omega]||.
    pub oracle_commutator: f64,
}

/// Verdict on a whole family.
#[derive(Debug, Clone, Serialize)]
pub struct JointVerdict {
    pub commutes: bool,
    /// Linear dimension of the algebra generated by all cocycles.
    pub cocycle_algebra_dim: usize,
    /// Largest commutator norm among that algebra's basis elements.
    pub max_commutator: f64,
    /// Largest density commutator over all pairs in the family.
    pub oracle_max_commutator: f64,
    /// Pair realizing the oracle maximum when the verdict is negative.
    pub offending_pair: Option<(String, String)>,
}

fn guard_pair(phi: &State, omega: &State) -> Result<()> {
    if !omega.is_faithful() {
        return Err(Error::NotFaithful {
            name: omega.name().to_string(),
        });
    }
    if !phi.same_algebra(omega) {
        return Err(Error::AlgebraMismatch);
    }
    Ok(())
}

/// Evaluate all five equivalent pairwise-commutation conditions plus the
/// density oracle, enforcing unanimity.
pub fn commutes_pairwise(phi: &State, omega: &State, grid: &[f64]) -> Result<PairVerdict> {
    guard_pair(phi, omega)?;
    let tol = *omega.algebra().tol();
    let eps = tol.eps_eq;
    let n = phi.density().dim();
    let cut = tol.eps_rank(n);
    let h_phi = phi.density();
    let h_omega = omega.density();

    let d_phi = phi.density_decomp();
    let d_omega = omega.density_decomp();
    let s_phi = d_phi.support(cut);
    let u_at = |t: f64| -> CMatrix {
        &d_phi.imaginary_power(t, cut) * &d_omega.imaginary_power(-t, cut)
    };
    let us: Vec<CMatrix> = grid.iter().map(|&t| u_at(t)).collect();

    let oracle_commutator = commutator(h_phi, h_omega).op_norm();

    // PT-i: invariance of phi under the modular flow of omega, in trace norm.
    let mut pt_i = 0.0f64;
    for &t in grid {
        let w = d_omega.imaginary_power(-t, cut);
        let flowed = &(&w * h_phi) * &w.adjoint();
        pt_i = pt_i.max(state_distance(&flowed, h_phi));
    }

    // PT-ii: cocycles sit in the centralizer of omega.
    let mut pt_ii = 0.0f64;
    for u in &us {
        pt_ii = pt_ii.max(commutator(u, h_omega).op_norm());
    }

    // PT-iii: group law on the grid plus partial unitarity in s(phi) M s(phi).
    let mut pt_iii = 0.0f64;
    for (i, &t) in grid.iter().enumerate() {
        for &s in grid.iter() {
            let prod = &us[i] * &u_at(s);
            pt_iii = pt_iii.max((&prod - &u_at(t + s)).op_norm());
        }
        pt_iii = pt_iii.max((&(&us[i] * &us[i].adjoint()) - &s_phi).op_norm());
        pt_iii = pt_iii.max((&(&us[i].adjoint() * &us[i]) - &s_phi).op_norm());
    }

    // PT-iv: existence of the relative density A with phi = omega_A. The
    // canonical candidate is h_phi h_omega^{-1}; the residual aggregates its
    // failure to be Hermitian, positive, centralized, and reproducing.
    let inv_omega = d_omega.map(|l| {
        if l > cut {
            C64::new(1.0 / l, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let a_raw = h_phi * &inv_omega;
    let herm_defect = (&a_raw - &a_raw.adjoint()).op_norm();
    let a_herm = a_raw.herm_part();
    let d_a = herm_eig(&a_herm, &tol)?;
    let negativity = (-d_a.min_eigenvalue()).max(0.0);
    let centralized_defect = commutator(&a_herm, h_omega).op_norm();
    let sqrt_a = d_a.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    let reproduced = &(&sqrt_a * h_omega) * &sqrt_a;
    let reproduction_defect = state_distance(&reproduced, h_phi);
    let pt_iv = herm_defect
        .max(negativity)
        .max(centralized_defect)
        .max(reproduction_defect);

    // comm1: the cocycle family commutes within itself.
    let mut comm1 = 0.0f64;
    for i in 0..us.len() {
        for j in (i + 1)..us.len() {
            comm1 = comm1.max(commutator(&us[i], &us[j]).op_norm());
        }
    }

    let mut residuals = BTreeMap::new();
    residuals.insert("PT-i".to_string(), pt_i);
    residuals.insert("PT-ii".to_string(), pt_ii);
    residuals.insert("PT-iii".to_string(), pt_iii);
    residuals.insert("PT-iv".to_string(), pt_iv);
    residuals.insert("comm1".to_string(), comm1);

    let mut verdicts: Vec<bool> = residuals.values().map(|&r| r <= eps).collect();
    verdicts.push(oracle_commutator <= eps);
    let first = verdicts[0];
    if verdicts.iter().any(|&v| v != first) {
        return Err(Error::EquivalenceViolation {
            details: format!(
                "pairwise conditions disagree for ('{}', '{}'): residuals {:?}, oracle {:.3e}",
                phi.name(),
                omega.name(),
                residuals,
                oracle_commutator
            ),
        });
    }
    Ok(PairVerdict {
        commutes: first,
        residuals,
        oracle_commutator,
    })
}

/// The positive operator A with phi = omega_A and [D phi : D omega]_t = A^{it},
/// for a commuting pair: A = h_phi h_omega^{-1}.
pub fn pt_density(phi: &State, omega: &State, grid: &[f64]) -> Result<CMatrix> {
    let verdict = commutes_pairwise(phi, omega, grid)?;
    if !verdict.commutes {
        return Err(Error::NotCommuting {
            residual: verdict.oracle_commutator,
        });
    }
    let tol = *omega.algebra().tol();
    let n = phi.density().dim();
    let cut = tol.eps_rank(n);
    let d_omega = omega.density_decomp();
    let inv_omega = d_omega.map(|l| {
        if l > cut {
            C64::new(1.0 / l, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let a = (phi.density() * &inv_omega).herm_part();
    let d_a = herm_eig(&a, &tol)?;
    let a = d_a.map(|l| C64::new(l.max(0.0), 0.0));
    let d_a = herm_eig(&a, &tol)?;

    // contract checks; failures here mean a tolerance pathology, not math
    let centralized = commutator(&a, omega.density()).op_norm();
    let sqrt_a = d_a.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    let reproduced = &(&sqrt_a * omega.density()) * &sqrt_a;
    let reproduction = state_distance(&reproduced, phi.density());
    let d_phi = phi.density_decomp();
    let mut cocycle_match = 0.0f64;
    for &t in grid {
        let u = &d_phi.imaginary_power(t, cut) * &d_omega.imaginary_power(-t, cut);
        cocycle_match = cocycle_match.max((&u - &d_a.imaginary_power(t, cut)).op_norm());
    }
    let worst = centralized.max(reproduction).max(cocycle_match);
    if worst > tol.eps_eq {
        return Err(Error::EquivalenceViolation {
            details: format!(
                "relative density checks failed for a commuting pair: residual {worst:.3e}"
            ),
        });
    }
    Ok(a)
}

/// Maximum density commutator over all pairs, with the realizing pair.
fn oracle_over_family(family: &[State]) -> (f64, Option<(String, String)>) {
    let mut worst = 0.0f64;
    let mut pair = None;
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            let c = commutator(family[i].density(), family[j].density()).op_norm();
            if c > worst {
                worst = c;
                pair = Some((
                    family[i].name().to_string(),
                    family[j].name().to_string(),
                ));
            }
        }
    }
    (worst, pair)
}

fn first_faithful(family: &[State]) -> Result<&State> {
    family
        .iter()
        .find(|s| s.is_faithful())
        .ok_or(Error::NoFaithfulState)
}

/// Joint commutativity: the algebra generated by all cocycles relative to the
/// first faithful member is abelian; cross-checked against the density oracle.
pub fn commutes_jointly(family: &[State], grid: &[f64]) -> Result<JointVerdict> {
    let omega = first_faithful(family)?;
    for s in family {
        if !s.same_algebra(omega) {
            return Err(Error::AlgebraMismatch);
        }
    }
    let tol = omega.algebra().tol();
    let n = omega.density().dim();
    let mut generators = Vec::with_capacity(family.len() * grid.len());
    for rho in family {
        let coc = Cocycle::new(rho.clone(), omega.clone())?;
        for &t in grid {
            generators.push(coc.at(t));
        }
    }
    let cocycle_algebra = generate_algebra(&generators, n, tol)?;
    let (abelian, max_commutator) = is_abelian(&cocycle_algebra);
    let (oracle_max_commutator, offending) = oracle_over_family(family);
    let oracle_commutes = oracle_max_commutator <= tol.eps_eq;
    if abelian != oracle_commutes {
        return Err(Error::EquivalenceViolation {
            details: format!(
                "cocycle-algebra verdict ({abelian}) and density oracle ({oracle_commutes}) disagree: \
                 commutators {max_commutator:.3e} vs {oracle_max_commutator:.3e}"
            ),
        });
    }
    Ok(JointVerdict {
        commutes: abelian,
        cocycle_algebra_dim: cocycle_algebra.dim(),
        max_commutator,
        oracle_max_commutator,
        offending_pair: if abelian { None } else { offending },
    })
}

/// The definition of joint commutativity does not depend on which faithful
/// member anchors the cocycles: returns the span distance between the two
/// generated cocycle algebras.
pub fn definition_consistency(
    family: &[State],
    omega1: &State,
    omega2: &State,
    grid: &[f64],
) -> Result<f64> {
    for f in [omega1, omega2] {
        if !f.is_faithful() {
            return Err(Error::NotFaithful {
                name: f.name().to_string(),
            });
        }
    }
    let joint = commutes_jointly(family, grid)?;
    if !joint.commutes {
        return Err(Error::NotJointlyCommuting {
            residual: joint.oracle_max_commutator,
        });
    }
    let n = omega1.density().dim();
    let tol = omega1.algebra().tol();
    let build = |base: &State| -> Result<Algebra> {
        let mut gens = Vec::with_capacity(family.len() * grid.len());
        for rho in family {
            let coc = Cocycle::new(rho.clone(), base.clone())?;
            for &t in grid {
                gens.push(coc.at(t));
            }
        }
        generate_algebra(&gens, n, tol)
    };
    let r1 = build(omega1)?;
    let r2 = build(omega2)?;
    r1.span_distance(&r2)
}

/// First pair failing the pairwise condition over a family.
#[derive(Debug, Clone, Serialize)]
pub struct PairwiseFailure {
    pub state: String,
    pub base: String,
    pub oracle_commutator: f64,
}

/// Pairwise condition over a family: every faithful member against every
/// member. Returns the overall verdict and the first failing pair.
pub fn pairwise_family(
    family: &[State],
    grid: &[f64],
) -> Result<(bool, Option<PairwiseFailure>)> {
    for omega in family.iter().filter(|s| s.is_faithful()) {
        for rho in family {
            let verdict = commutes_pairwise(rho, omega, grid)?;
            if !verdict.commutes {
                return Ok((
                    false,
                    Some(PairwiseFailure {
                        state: rho.name().to_string(),
                        base: omega.name().to_string(),
                        oracle_commutator: verdict.oracle_commutator,
                    }),
                ));
            }
        }
    }
    Ok((true, None))
}

/// Outcome of sampling random convex combinations and comparing the pairwise
/// and joint conditions on the enlarged family.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub raw_pairwise: bool,
    pub raw_joint: bool,
    pub convex_pairwise: bool,
    pub convex_joint: bool,
    /// On the convexified family the two conditions must coincide.
    pub equivalence_holds: bool,
    pub convex_failing_pair: Option<PairwiseFailure>,
    pub seed: u64,
    pub samples: usize,
}

/// Sample `samples` Dirichlet-uniform convex combinations of the family,
/// evaluate the pairwise and joint conditions on the raw and on the enlarged
/// family, and assert their equivalence on the latter.
pub fn convexity_harness(
    family: &[State],
    samples: usize,
    seed: u64,
    grid: &[f64],
) -> Result<ConvexityReport> {
    use rand::Rng;
    use rand::SeedableRng;

    let omega = first_faithful(family)?;
    let alg = Arc::clone(omega.algebra());
    let n = alg.ambient_dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut extended: Vec<State> = family.to_vec();
    for k in 0..samples {
        let mut weights: Vec<f64> = (0..family.len())
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        let mut density = CMatrix::zeros(n);
        for (s, &w) in family.iter().zip(weights.iter()) {
            density = &density + &s.density().scale(C64::new(w, 0.0));
        }
        extended.push(make_state(&alg, &density, format!("sample-{k:03}"))?);
    }

    let (raw_pairwise, _) = pairwise_family(family, grid)?;
    let raw_joint = commutes_jointly(family, grid)?.commutes;
    let (convex_pairwise, convex_failing_pair) = pairwise_family(&extended, grid)?;
    let convex_joint = commutes_jointly(&extended, grid)?.commutes;
    let equivalence_holds = convex_pairwise == convex_joint;
    if !equivalence_holds {
        return Err(Error::EquivalenceViolation {
            details: format!(
                "pairwise ({convex_pairwise}) and joint ({convex_joint}) disagree on a convex family"
            ),
        });
    }
    Ok(ConvexityReport {
        raw_pairwise,
        raw_joint,
        convex_pairwise,
        convex_joint,
        equivalence_holds,
        convex_failing_pair,
        seed,
        samples,
    })
}

/// The packaged qubit counterexample showing the convexity hypothesis is
/// necessary: trace state, ground-state projection, plus-state projection.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub raw_pairwise: bool,
    pub raw_joint: bool,
    pub oracle_max_commutator: f64,
    pub offending_pair: (String, String),
    /// Commutator of the faithful midpoint (trace + ground)/2 against the
    /// plus projection: the witness that detects non-commutation pairwise.
    pub midpoint_witness_commutator: f64,
    pub convex_pairwise: bool,
    pub convex_joint: bool,
    pub seed: u64,
}

const COUNTEREXAMPLE_SEED: u64 = 7;

pub fn counterexample_family() -> Result<(Arc<Algebra>, Vec<State>)> {
    let alg = Arc::new(Algebra::full(2, crate::tolerances::Tolerances::default()));
    let trace = crate::states::trace_state(&alg, "trace");
    let proj0 = make_state(&alg, &CMatrix::from_real_diag(&[1.0, 0.0]), "proj0")?;
    let plus = CMatrix::from_rows(&[
        vec![C64::new(0.5, 0.0), C64::new(0.5, 0.0)],
        vec![C64::new(0.5, 0.0), C64::new(0.5, 0.0)],
    ])?;
    let projplus = make_state(&alg, &plus, "projplus")?;
    Ok((alg, vec![trace, proj0, projplus]))
}

pub fn counterexample_qubit(grid: &[f64]) -> Result<(Vec<State>, CounterexampleReport)> {
    let (_, family) = counterexample_family()?;
    let (raw_pairwise, _) = pairwise_family(&family, grid)?;
    let joint = commutes_jointly(&family, grid)?;
    let offending = joint
        .offending_pair
        .clone()
        .unwrap_or(("".into(), "".into()));

    let midpoint = (family[0].density() + family[1].density()).scale(C64::new(0.5, 0.0));
    let midpoint_witness_commutator = commutator(&midpoint, family[2].density()).op_norm();

    let convex = convexity_harness(&family, 10, COUNTEREXAMPLE_SEED, grid)?;
    let report = CounterexampleReport {
        raw_pairwise,
        raw_joint: joint.commutes,
        oracle_max_commutator: joint.oracle_max_commutator,
        offending_pair: offending,
        midpoint_witness_commutator,
        convex_pairwise: convex.convex_pairwise,
        convex_joint: convex.convex_joint,
        seed: COUNTEREXAMPLE_SEED,
    };
    Ok((family, report))
}

/// Seeded generators for the verification harnesses: commuting families are
/// spectral functions of one generic element (equivalently, random spectra
/// conjugated by one shared unitary), generic pairs are independent Wishart
/// densities rejection-sampled to a minimum commutator.
pub mod sampling {
    use super::*;
    use crate::linalg_core::random_density;
    use crate::tolerances::CLUSTER_GAP;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// Random faithful state: the conditional expectation of a Wishart
    /// density (positivity and faithfulness survive the projection).
    pub fn faithful_state(
        alg: &Arc<Algebra>,
        name: impl Into<String>,
        rng: &mut ChaCha8Rng,
    ) -> Result<State> {
        let d = random_density(alg.ambient_dim(), rng);
        make_state(alg, &d, name)
    }

    /// Rank-deficient density on the full algebra: random spectrum with
    /// `zeros` vanishing entries, conjugated by a random unitary.
    pub fn rank_deficient_state(
        alg: &Arc<Algebra>,
        zeros: usize,
        name: impl Into<String>,
        rng: &mut ChaCha8Rng,
    ) -> Result<State> {
        let n = alg.ambient_dim();
        let u = crate::linalg_core::random_unitary(n, rng);
        let mut spec: Vec<f64> = (0..n).map(|_| 1.0 - rng.random::<f64>()).collect();
        for s in spec.iter_mut().take(zeros.min(n.saturating_sub(1))) {
            *s = 0.0;
        }
        let total: f64 = spec.iter().sum();
        for s in spec.iter_mut() {
            *s /= total;
        }
        spec.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = crate::linalg_core::density_from_spectrum(&u, &spec);
        make_state(alg, &d, name)
    }

    /// A mutually commuting family inside the algebra: cluster-constant
    /// spectral functions of one generic self-adjoint element of M. The first
    /// `non_faithful` members get one spectral cluster zeroed out.
    pub fn commuting_family(
        alg: &Arc<Algebra>,
        count: usize,
        non_faithful: usize,
        name_prefix: &str,
        seed: u64,
    ) -> Result<Vec<State>> {
        assert!(non_faithful < count, "need at least one faithful member");
        let tol = alg.tol();
        let n = alg.ambient_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = CMatrix::zeros(n);
        for b in alg.basis() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let part = &b.scale(C64::new(re, im)) + &b.adjoint().scale(C64::new(re, -im));
            g = &g + &part;
        }
        let g = g.scale(C64::new(1.0 / g.op_norm(), 0.0));
        let decomp = herm_eig(&g, tol)?;
        // cluster boundaries of the generic spectrum
        let mut clusters: Vec<(usize, usize)> = Vec::new();
        let mut start = 0usize;
        while start < n {
            let mut end = start + 1;
            while end < n && decomp.eigenvalues[end] - decomp.eigenvalues[end - 1] < CLUSTER_GAP {
                end += 1;
            }
            clusters.push((start, end));
            start = end;
        }
        let mut family = Vec::with_capacity(count);
        for i in 0..count {
            let mut values: Vec<f64> = clusters
                .iter()
                .map(|_| (0.2 + rng.random::<f64>()).exp())
                .collect();
            if i < non_faithful && clusters.len() > 1 {
                let kill = rng.random_range(0..clusters.len());
                values[kill] = 0.0;
            }
            let mut spectrum = vec![0.0f64; n];
            for (ci, &(s, e)) in clusters.iter().enumerate() {
                for item in spectrum.iter_mut().take(e).skip(s) {
                    *item = values[ci];
                }
            }
            let u = &decomp.basis;
            let dm = CMatrix::from_real_diag(&spectrum);
            let density = &(u * &dm) * &u.adjoint();
            let tr = density.trace().re;
            let density = density.scale(C64::new(1.0 / tr, 0.0));
            family.push(make_state(alg, &density, format!("{name_prefix}-{i}"))?);
        }
        Ok(family)
    }

    /// (phi, omega) with omega faithful and a density commutator of at least
    /// `min_commutator`, by rejection.
    pub fn generic_pair(
        alg: &Arc<Algebra>,
        seed: u64,
        min_commutator: f64,
        non_faithful_numerator: bool,
    ) -> Result<(State, State)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let phi = if non_faithful_numerator {
                rank_deficient_state(alg, 1 + rng.random_range(0..alg.ambient_dim() - 1), "phi", &mut rng)?
            } else {
                faithful_state(alg, "phi", &mut rng)?
            };
            let omega = faithful_state(alg, "omega", &mut rng)?;
            if commutator(phi.density(), omega.density()).op_norm() >= min_commutator {
                return Ok((phi, omega));
            }
        }
        Err(Error::EquivalenceViolation {
            details: "rejection sampling failed to reach the commutator floor".into(),
        })
    }

    /// A generic (jointly non-commuting) family with a faithful first member.
    pub fn generic_family(
        alg: &Arc<Algebra>,
        count: usize,
        seed: u64,
        min_commutator: f64,
    ) -> Result<Vec<State>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let mut family = Vec::with_capacity(count);
            for i in 0..count {
                family.push(faithful_state(alg, format!("state-{i}"), &mut rng)?);
            }
            let (oracle, _) = oracle_over_family(&family);
            if oracle >= min_commutator {
                return Ok(family);
            }
        }
        Err(Error::EquivalenceViolation {
            details: "rejection sampling failed to reach the commutator floor".into(),
        })
    }
}
