//! Finite-dimensional von Neumann algebra engine: generated algebras via the
//! double commutant, commutants, centers, abelianness, minimal projections of
//! abelian algebras, and the trace-preserving conditional expectation.
//!
//! An algebra is held as an orthonormal basis of its span under the
//! Hilbert-Schmidt inner product. The commutant is the null space of the
//! stacked maps X -> XB - BX; rank decisions use a singular-value threshold
//! eps_rank * sigma_max, with candidate null vectors re-verified against the
//! commutators directly so the threshold acts on accurately computed
//! singular values rather than on squared eigenvalues.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg_core::{commutator, hs_inner, tensor_product, C64, CMatrix};
use crate::tolerances::{Tolerances, CLUSTER_GAP};

/// Pairs whose product-closure residual is checked in full; above this many
/// basis elements a deterministic stride sample is used instead.
const CLOSURE_CHECK_LIMIT: usize = 64;

const GENERIC_RETRIES: usize = 8;

/// A unital *-subalgebra of the ambient n x n matrices, stored as an
/// orthonormal basis under tr(A* B).
#[derive(Debug, Clone)]
pub struct Algebra {
    ambient_dim: usize,
    basis: Vec<CMatrix>,
    tol: Tolerances,
}

fn vec_of(m: &CMatrix) -> DVector<C64> {
    let n = m.dim();
    DVector::from_fn(n * n, |k, _| m[(k / n, k % n)])
}

fn mat_of(v: &DVector<C64>, n: usize) -> CMatrix {
    CMatrix::from_fn(n, |i, j| v[i * n + j])
}

/// Pivoted modified Gram-Schmidt in the HS inner product with a
/// re-orthogonalization pass. Drops directions below a relative cutoff.
fn orthonormalize_span(mats: &[CMatrix]) -> Vec<CMatrix> {
    let mut pool: Vec<CMatrix> = mats.to_vec();
    let max_norm = pool.iter().map(|m| m.fro_norm()).fold(0.0f64, f64::max);
    if max_norm == 0.0 {
        return Vec::new();
    }
    let drop_tol = 1e-10 * max_norm;
    let mut picked: Vec<CMatrix> = Vec::new();
    loop {
        let mut best = usize::MAX;
        let mut best_norm = drop_tol;
        for (j, m) in pool.iter().enumerate() {
            let nn = m.fro_norm();
            if nn > best_norm {
                best = j;
                best_norm = nn;
            }
        }
        if best == usize::MAX {
            break;
        }
        let mut v = pool.swap_remove(best);
        for p in &picked {
            let ov = hs_inner(p, &v).unwrap();
            v = &v - &p.scale(ov);
        }
        let nn = v.fro_norm();
        if nn < drop_tol {
            continue;
        }
        v = v.scale(C64::new(1.0 / nn, 0.0));
        for m in pool.iter_mut() {
            let ov = hs_inner(&v, m).unwrap();
            *m = &*m - &v.scale(ov);
        }
        picked.push(v);
    }
    picked
}

/// Orthonormal basis of {X : XB = BX for every B in `mats` and B*}.
///
/// Builds the PSD operator H = sum_B L_B* L_B on C^{n^2} by Kronecker
/// assembly, takes its null space, and re-verifies each candidate against the
/// commutators directly.
pub(crate) fn commutant_of_set(n: usize, mats: &[CMatrix], tol: &Tolerances) -> Result<Vec<CMatrix>> {
    let mut set: Vec<CMatrix> = Vec::new();
    for m in mats {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.dim(),
            });
        }
        let nn = m.fro_norm();
        if nn < 1e-14 {
            continue;
        }
        let normalized = m.scale(C64::new(1.0 / nn, 0.0));
        set.push(normalized.adjoint());
        set.push(normalized);
    }
    if set.is_empty() {
        // commutant of the scalars: everything
        let mut basis = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                basis.push(CMatrix::from_fn(n, |r, c| {
                    if r == i && c == j {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }));
            }
        }
        return Ok(basis);
    }

    let id = CMatrix::identity(n);
    let mut h = DMatrix::<C64>::zeros(n * n, n * n);
    for b in &set {
        let bt = b.transpose();
        let bc = b.conjugate();
        let badj = b.adjoint();
        // L_B* L_B = I (x) conj(B) B^T  +  B* B (x) I  -  B (x) conj(B)  -  B* (x) B^T
        h += &tensor_product(&id, &(&bc * &bt)).inner;
        h += &tensor_product(&(&badj * b), &id).inner;
        h -= &tensor_product(b, &bc).inner;
        h -= &tensor_product(&badj, &bt).inner;
    }
    let hm = CMatrix::new_unchecked(h).herm_part();
    let decomp = crate::linalg_core::herm_eig(&hm, tol)?;
    let sigma_max = decomp
        .eigenvalues
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt();
    // The inputs are unit-Frobenius, so a non-degenerate stacked commutator
    // map has sigma_max = O(1); the floor keeps the threshold meaningful when
    // the whole system is numerically zero (all inputs scalar).
    let threshold = tol.eps_rank(n) * sigma_max.max(1.0);
    // Candidate filter in eigenvalue space. The absolute floor covers
    // assembly noise in H: when the exact H is itself at noise scale, every
    // eigenvalue is rounding-level and only the direct commutator check can
    // decide membership.
    let lambda_floor = (1e-3 * sigma_max)
        .powi(2)
        .max(threshold * threshold)
        .max(1e-12 * n as f64);

    let mut basis = Vec::new();
    for (k, &lambda) in decomp.eigenvalues.iter().enumerate() {
        if lambda.max(0.0) > lambda_floor {
            continue;
        }
        let col = decomp.basis.inner.column(k).into_owned();
        let x = mat_of(&col, n);
        let mut sq = 0.0f64;
        for b in &set {
            sq += commutator(&x, b).fro_norm().powi(2);
        }
        if sq.sqrt() <= threshold {
            basis.push(x);
        }
    }
    Ok(basis)
}

/// Orthonormal basis of span(b1) intersect span(b2), canonical.
pub(crate) fn intersect_spans(
    n: usize,
    b1: &[CMatrix],
    b2: &[CMatrix],
    tol: &Tolerances,
) -> Result<Vec<CMatrix>> {
    let nn = n * n;
    let mut q1 = DMatrix::<C64>::zeros(nn, nn);
    for b in b1 {
        let v = vec_of(b);
        q1 += &v * v.adjoint();
    }
    let mut q2 = DMatrix::<C64>::zeros(nn, nn);
    for b in b2 {
        let v = vec_of(b);
        q2 += &v * v.adjoint();
    }
    let id = DMatrix::<C64>::identity(nn, nn);
    let h = CMatrix::new_unchecked(&id - &q1 + (&id - &q2)).herm_part();
    let decomp = crate::linalg_core::herm_eig(&h, tol)?;
    let threshold = tol.eps_rank(n);
    let mut out = Vec::new();
    for (k, &lambda) in decomp.eigenvalues.iter().enumerate() {
        if lambda > 1e-6 {
            continue;
        }
        let v = decomp.basis.inner.column(k).into_owned();
        let r1 = (&v - &q1 * &v).norm();
        let r2 = (&v - &q2 * &v).norm();
        if (r1 * r1 + r2 * r2).sqrt() <= threshold {
            out.push(mat_of(&v, n));
        }
    }
    Ok(out)
}

impl Algebra {
    /// Wrap an already orthonormal basis, enforcing the algebra invariants:
    /// the unit lies in the span, the span is closed under adjoints and
    /// products, and the Gram matrix is the identity.
    pub fn from_parts(ambient_dim: usize, basis: Vec<CMatrix>, tol: Tolerances) -> Result<Self> {
        let a = Algebra {
            ambient_dim,
            basis,
            tol,
        };
        a.validate()?;
        Ok(a)
    }

    /// Orthonormalize a spanning set and wrap it as an algebra.
    pub fn from_span(ambient_dim: usize, span: &[CMatrix], tol: Tolerances) -> Result<Self> {
        for m in span {
            if m.dim() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    found: m.dim(),
                });
            }
        }
        Algebra::from_parts(ambient_dim, orthonormalize_span(span), tol)
    }

    /// The full matrix algebra M_n.
    pub fn full(n: usize, tol: Tolerances) -> Self {
        let mut basis = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                basis.push(CMatrix::from_fn(n, |r, c| {
                    if r == i && c == j {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }));
            }
        }
        Algebra {
            ambient_dim: n,
            basis,
            tol,
        }
    }

    /// The diagonal (maximal abelian) subalgebra of M_n.
    pub fn diagonal(n: usize, tol: Tolerances) -> Self {
        let basis = (0..n)
            .map(|i| {
                CMatrix::from_fn(n, |r, c| {
                    if r == i && c == i {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        Algebra {
            ambient_dim: n,
            basis,
            tol,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Linear dimension of the algebra.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tol
    }

    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.ambient_dim)
    }

    /// Trace-preserving conditional expectation: the HS-orthogonal projection
    /// onto the span.
    pub fn cond_expect(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: x.dim(),
            });
        }
        let mut out = CMatrix::zeros(self.ambient_dim);
        for b in &self.basis {
            let c = hs_inner(b, x)?;
            out = &out + &b.scale(c);
        }
        Ok(out)
    }

    /// Operator-norm distance of x from the span.
    pub fn containment_residual(&self, x: &CMatrix) -> Result<f64> {
        Ok((x - &self.cond_expect(x)?).op_norm())
    }

    /// Maximum HS residual of projecting each basis element of one algebra
    /// onto the span of the other, in both directions.
    pub fn span_distance(&self, other: &Algebra) -> Result<f64> {
        let mut worst = 0.0f64;
        for b in &self.basis {
            worst = worst.max((b - &other.cond_expect(b)?).fro_norm());
        }
        for b in &other.basis {
            worst = worst.max((b - &self.cond_expect(b)?).fro_norm());
        }
        Ok(worst)
    }

    fn validate(&self) -> Result<()> {
        let n = self.ambient_dim;
        let m = self.basis.len();
        if m == 0 {
            return Err(Error::InvalidAlgebra {
                reason: "empty basis".into(),
            });
        }
        for b in &self.basis {
            if b.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: b.dim(),
                });
            }
        }
        // Gram matrix
        for i in 0..m {
            for j in 0..m {
                let g = hs_inner(&self.basis[i], &self.basis[j])?;
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - C64::new(target, 0.0)).norm() > self.tol.eps_eq {
                    return Err(Error::InvalidAlgebra {
                        reason: format!("basis not orthonormal at pair ({i}, {j})"),
                    });
                }
            }
        }
        let unit_res = self.containment_residual(&self.identity())?;
        if unit_res > self.tol.eps_eq {
            return Err(Error::InvalidAlgebra {
                reason: format!("unit not in span: residual {unit_res:.3e}"),
            });
        }
        for b in &self.basis {
            let adj_res = self.containment_residual(&b.adjoint())?;
            if adj_res > self.tol.eps_eq {
                return Err(Error::InvalidAlgebra {
                    reason: format!("span not adjoint-closed: residual {adj_res:.3e}"),
                });
            }
        }
        let stride = if m > CLOSURE_CHECK_LIMIT {
            m / CLOSURE_CHECK_LIMIT + 1
        } else {
            1
        };
        for i in (0..m).step_by(stride) {
            for j in (0..m).step_by(stride) {
                let prod = &self.basis[i] * &self.basis[j];
                let res = self.containment_residual(&prod)?;
                if res > self.tol.eps_eq {
                    return Err(Error::InvalidAlgebra {
                        reason: format!(
                            "span not closed under products at pair ({i}, {j}): residual {res:.3e}"
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

impl Serialize for Algebra {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Algebra", 2)?;
        st.serialize_field("ambient_dim", &self.ambient_dim)?;
        st.serialize_field("basis", &self.basis)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Algebra {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            ambient_dim: usize,
            basis: Vec<CMatrix>,
        }
        let raw = Raw::deserialize(d)?;
        Algebra::from_parts(raw.ambient_dim, raw.basis, Tolerances::default())
            .map_err(serde::de::Error::custom)
    }
}

/// The smallest von Neumann algebra containing the generators: the double
/// commutant of {generators} with adjoints and the unit adjoined.
pub fn generate_algebra(generators: &[CMatrix], n: usize, tol: &Tolerances) -> Result<Algebra> {
    for g in generators {
        if g.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: g.dim(),
            });
        }
    }
    let first = commutant_of_set(n, generators, tol)?;
    let second = commutant_of_set(n, &first, tol)?;
    let alg = Algebra::from_parts(n, second, *tol)?;
    for g in generators {
        let nn = g.fro_norm();
        if nn < 1e-14 {
            continue;
        }
        let res = alg.containment_residual(&g.scale(C64::new(1.0 / nn, 0.0)))?;
        if res > tol.eps_eq {
            return Err(Error::EquivalenceViolation {
                details: format!("generated algebra misses a generator: residual {res:.3e}"),
            });
        }
    }
    Ok(alg)
}

/// Commutant {X : XB = BX for all B in the algebra}, as an algebra.
pub fn commutant(a: &Algebra) -> Result<Algebra> {
    let basis = commutant_of_set(a.ambient_dim, &a.basis, &a.tol)?;
    Algebra::from_parts(a.ambient_dim, basis, a.tol)
}

/// Center: the subspace intersection of the algebra with its commutant.
pub fn center(a: &Algebra) -> Result<Algebra> {
    let comm = commutant(a)?;
    let basis = intersect_spans(a.ambient_dim, &a.basis, &comm.basis, &a.tol)?;
    Algebra::from_parts(a.ambient_dim, basis, a.tol)
}

/// True iff every pair of basis elements commutes within eps_eq; the maximum
/// commutator norm is returned either way.
pub fn is_abelian(a: &Algebra) -> (bool, f64) {
    let mut worst = 0.0f64;
    for i in 0..a.basis.len() {
        for j in (i + 1)..a.basis.len() {
            worst = worst.max(commutator(&a.basis[i], &a.basis[j]).op_norm());
        }
    }
    (worst <= a.tol.eps_eq, worst)
}

/// Pairwise orthogonal minimal projections of an abelian algebra summing to
/// the unit, computed by joint diagonalization via a seeded generic
/// self-adjoint element. Ordered by the generic element's eigenvalue.
pub fn minimal_projections(a: &Algebra, seed: u64) -> Result<Vec<CMatrix>> {
    let (abelian, residual) = is_abelian(a);
    if !abelian {
        return Err(Error::NotAbelian { residual });
    }
    let n = a.ambient_dim;
    let m = a.dim();
    let mut sa_parts: Vec<CMatrix> = Vec::with_capacity(2 * m);
    for b in &a.basis {
        let re = b.herm_part();
        let im = (b - &b.adjoint()).scale(C64::new(0.0, -0.5));
        if re.fro_norm() > 1e-14 {
            sa_parts.push(re);
        }
        if im.fro_norm() > 1e-14 {
            sa_parts.push(im);
        }
    }

    for attempt in 0..GENERIC_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let mut g = CMatrix::zeros(n);
        for p in &sa_parts {
            let c: f64 = rng.sample(StandardNormal);
            g = &g + &p.scale(C64::new(c, 0.0));
        }
        let decomp = crate::linalg_core::herm_eig(&g, &a.tol)?;
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
        if clusters.len() != m {
            continue;
        }
        let mut projections = Vec::with_capacity(m);
        for &(s, e) in &clusters {
            let mut p = DMatrix::<C64>::zeros(n, n);
            for k in s..e {
                let v = decomp.basis.inner.column(k).into_owned();
                p += &v * v.adjoint();
            }
            projections.push(CMatrix::new_unchecked(p));
        }
        if verify_projections(a, &projections).is_ok() {
            return Ok(projections);
        }
    }
    Err(Error::DegenerateGeneric {
        attempts: GENERIC_RETRIES,
    })
}

fn verify_projections(a: &Algebra, ps: &[CMatrix]) -> Result<()> {
    let eps = a.tol.eps_eq;
    let mut sum = CMatrix::zeros(a.ambient_dim);
    for p in ps {
        sum = &sum + p;
        if a.containment_residual(p)? > eps {
            return Err(Error::InvalidAlgebra {
                reason: "projection outside algebra".into(),
            });
        }
    }
    if (&sum - &a.identity()).op_norm() > eps {
        return Err(Error::InvalidAlgebra {
            reason: "projections do not resolve the unit".into(),
        });
    }
    for (i, p) in ps.iter().enumerate() {
        for (j, q) in ps.iter().enumerate() {
            let prod = p * q;
            let target = if i == j { p.clone() } else { CMatrix::zeros(a.ambient_dim) };
            if (&prod - &target).op_norm() > eps {
                return Err(Error::InvalidAlgebra {
                    reason: "projections not orthogonal".into(),
                });
            }
        }
    }
    // every basis element is a combination of the atoms
    let atoms = Algebra {
        ambient_dim: a.ambient_dim,
        basis: ps
            .iter()
            .map(|p| p.scale(C64::new(1.0 / p.fro_norm(), 0.0)))
            .collect(),
        tol: a.tol,
    };
    for b in &a.basis {
        if atoms.containment_residual(b)? > eps {
            return Err(Error::InvalidAlgebra {
                reason: "atoms do not span the algebra".into(),
            });
        }
    }
    Ok(())
}
