//! Dense complex-matrix substrate: Hermitian eigendecomposition with a
//! canonically ordered eigenbasis, functional calculus including imaginary
//! powers with the kernel convention `0^{it} := 0`, tensor products, partial
//! traces, and Hilbert-Schmidt geometry.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tolerances::{Tolerances, CLUSTER_GAP};

pub type C64 = Complex<f64>;

/// Coordinates below this modulus count as zero when fixing eigenvector phases.
const PHASE_TOL: f64 = 1e-8;

/// Dense complex square matrix, the universal carrier of operators.
///
/// Entries are always finite; constructors reject NaN and infinities.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    pub(crate) inner: DMatrix<C64>,
}

impl CMatrix {
    pub(crate) fn new_unchecked(inner: DMatrix<C64>) -> Self {
        debug_assert!(inner.is_square());
        CMatrix { inner }
    }

    /// Build from row-major nested entries. Rejects ragged/non-square input
    /// and non-finite entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, z) in row.iter().enumerate() {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFiniteEntry { row: i, col: j });
                }
            }
        }
        Ok(CMatrix::new_unchecked(DMatrix::from_fn(n, n, |i, j| {
            rows[i][j]
        })))
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        CMatrix::new_unchecked(DMatrix::from_fn(n, n, f))
    }

    pub fn zeros(n: usize) -> Self {
        CMatrix::new_unchecked(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        CMatrix::new_unchecked(DMatrix::identity(n, n))
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        CMatrix::from_fn(diag.len(), |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_complex_diag(diag: &[C64]) -> Self {
        CMatrix::from_fn(diag.len(), |i, j| {
            if i == j {
                diag[i]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn adjoint(&self) -> Self {
        CMatrix::new_unchecked(self.inner.adjoint())
    }

    pub fn transpose(&self) -> Self {
        CMatrix::new_unchecked(self.inner.transpose())
    }

    pub fn conjugate(&self) -> Self {
        CMatrix::new_unchecked(self.inner.map(|z| z.conj()))
    }

    pub fn scale(&self, c: C64) -> Self {
        CMatrix::new_unchecked(&self.inner * c)
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    /// Frobenius (Hilbert-Schmidt) norm.
    pub fn fro_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Operator norm: the largest singular value, computed as
    /// sqrt(lambda_max(A* A)).
    pub fn op_norm(&self) -> f64 {
        let gram = self.inner.adjoint() * &self.inner;
        let eigs = gram.symmetric_eigen().eigenvalues;
        eigs.iter().fold(0.0f64, |m, &l| m.max(l)).max(0.0).sqrt()
    }

    /// Trace norm: the sum of singular values.
    pub fn trace_norm(&self) -> f64 {
        let gram = self.inner.adjoint() * &self.inner;
        let eigs = gram.symmetric_eigen().eigenvalues;
        eigs.iter().map(|&l| l.max(0.0).sqrt()).sum()
    }

    /// Operator-norm distance from being Hermitian.
    pub fn herm_residual(&self) -> f64 {
        (self - &self.adjoint()).op_norm()
    }

    /// Hermitian part (A + A*)/2.
    pub fn herm_part(&self) -> Self {
        CMatrix::new_unchecked((&self.inner + self.inner.adjoint()).unscale(2.0))
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| format!("{:+.4}{:+.4}i", self[(i, j)].re, self[(i, j)].im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.inner[idx]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix::new_unchecked(&self.inner + &rhs.inner)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix::new_unchecked(&self.inner - &rhs.inner)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix::new_unchecked(&self.inner * &rhs.inner)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix::new_unchecked(-&self.inner)
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let rows: Vec<Vec<[f64; 2]>> = (0..n)
            .map(|i| (0..n).map(|j| [self[(i, j)].re, self[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let entries: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
            .collect();
        CMatrix::from_rows(&entries).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// AB - BA.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    &(a * b) - &(b * a)
}

/// tr(A* B). Sesquilinear in the physics convention (conjugate-linear in A).
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..a.dim() {
        for i in 0..a.dim() {
            acc += a[(i, j)].conj() * b[(i, j)];
        }
    }
    Ok(acc)
}

/// Kronecker product with row-major block layout, A-index major:
/// `(A (x) B)[i*nB + k, j*nB + l] = A[i,j] * B[k,l]`.
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    CMatrix::new_unchecked(a.inner.kronecker(&b.inner))
}

/// Which tensor factor `partial_trace` sums out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

/// Partial trace of an operator on an asymmetric bipartite space d1 (x) d2.
pub(crate) fn partial_trace_rect(z: &DMatrix<C64>, d1: usize, d2: usize, side: Side) -> DMatrix<C64> {
    debug_assert_eq!(z.nrows(), d1 * d2);
    match side {
        Side::First => DMatrix::from_fn(d2, d2, |k, l| {
            (0..d1).map(|i| z[(i * d2 + k, i * d2 + l)]).sum()
        }),
        Side::Second => DMatrix::from_fn(d1, d1, |i, j| {
            (0..d2).map(|k| z[(i * d2 + k, j * d2 + k)]).sum()
        }),
    }
}

/// Partial trace over one factor of an n (x) n bipartite operator.
/// `partial_trace(A (x) B, Second) = A * tr(B)`.
pub fn partial_trace(z: &CMatrix, side: Side, n: usize) -> Result<CMatrix> {
    if z.dim() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: z.dim(),
        });
    }
    Ok(CMatrix::new_unchecked(partial_trace_rect(
        &z.inner, n, n, side,
    )))
}

/// Hermitian eigendecomposition with ascending eigenvalues and a canonical
/// eigenbasis: degenerate clusters (gap < 1e-8) get a pivoted-Gram-Schmidt
/// basis of the cluster projector, phase-fixed (first nonzero coordinate real
/// positive) and ordered lexicographically. Output is a pure function of the
/// input bits.
#[derive(Debug, Clone)]
pub struct HermDecomp {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column i pairs with `eigenvalues[i]`.
    pub basis: CMatrix,
}

impl HermDecomp {
    /// U diag(f(lambda)) U*.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let u = &self.basis.inner;
        let d = DMatrix::<C64>::from_fn(self.eigenvalues.len(), self.eigenvalues.len(), |i, j| {
            if i == j {
                f(self.eigenvalues[i])
            } else {
                C64::new(0.0, 0.0)
            }
        });
        CMatrix::new_unchecked(u * d * u.adjoint())
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|l| C64::new(l, 0.0))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Imaginary power with the kernel convention: eigenvalues at or below
    /// `cutoff` map to 0, the rest to lambda^{it}.
    pub fn imaginary_power(&self, t: f64, cutoff: f64) -> CMatrix {
        self.map(|l| {
            if l > cutoff {
                C64::from_polar(1.0, t * l.ln())
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Spectral projection onto eigenvalues above `cutoff`.
    pub fn support(&self, cutoff: f64) -> CMatrix {
        self.map(|l| {
            if l > cutoff {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

fn phase_fix(v: &mut DVector<C64>) {
    for j in 0..v.len() {
        let m = v[j].norm();
        if m > PHASE_TOL {
            let ph = v[j].conj() / m;
            for x in v.iter_mut() {
                *x *= ph;
            }
            return;
        }
    }
}

fn lex_cmp(a: &DVector<C64>, b: &DVector<C64>) -> Ordering {
    for j in 0..a.len() {
        match a[j].re.partial_cmp(&b[j].re).unwrap() {
            Ordering::Equal => {}
            ord => return ord,
        }
        match a[j].im.partial_cmp(&b[j].im).unwrap() {
            Ordering::Equal => {}
            ord => return ord,
        }
    }
    Ordering::Equal
}

/// Canonical orthonormal basis of the span of `vectors` (assumed orthonormal),
/// depending only on the spanned subspace: pivoted modified Gram-Schmidt over
/// the columns of the projector, with a re-orthogonalization pass.
fn canonical_subspace_basis(vectors: &[DVector<C64>]) -> Vec<DVector<C64>> {
    let k = vectors.len();
    if k == 0 {
        return Vec::new();
    }
    let n = vectors[0].len();
    let mut proj = DMatrix::<C64>::zeros(n, n);
    for v in vectors {
        proj += v * v.adjoint();
    }
    let mut cols: Vec<DVector<C64>> = (0..n).map(|j| proj.column(j).into_owned()).collect();
    let mut picked: Vec<DVector<C64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best = 0usize;
        let mut best_norm = -1.0f64;
        for (j, c) in cols.iter().enumerate() {
            let nn = c.norm();
            if nn > best_norm {
                best = j;
                best_norm = nn;
            }
        }
        let mut v = cols[best].clone();
        for p in &picked {
            let ov = p.dotc(&v);
            v -= p * ov;
        }
        let nn = v.norm();
        v = v.unscale(nn);
        for c in cols.iter_mut() {
            let ov = v.dotc(c);
            *c -= &v * ov;
        }
        picked.push(v);
    }
    for v in picked.iter_mut() {
        phase_fix(v);
    }
    picked.sort_by(lex_cmp);
    picked
}

/// Hermitian eigendecomposition. Fails with `NonHermitian` if the asymmetry
/// exceeds eps_eq; the matrix is symmetrized before decomposition.
pub fn herm_eig(h: &CMatrix, tol: &Tolerances) -> Result<HermDecomp> {
    let asym = h.herm_residual();
    if asym > tol.eps_eq {
        return Err(Error::NonHermitian { residual: asym });
    }
    let n = h.dim();
    let se = h.herm_part().inner.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());

    let mut eigenvalues = Vec::with_capacity(n);
    let mut columns: Vec<DVector<C64>> = Vec::with_capacity(n);
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n
            && se.eigenvalues[order[end]] - se.eigenvalues[order[end - 1]] < CLUSTER_GAP
        {
            end += 1;
        }
        let cluster: Vec<DVector<C64>> = order[start..end]
            .iter()
            .map(|&i| se.eigenvectors.column(i).into_owned())
            .collect();
        let canon = canonical_subspace_basis(&cluster);
        for (off, v) in canon.into_iter().enumerate() {
            eigenvalues.push(se.eigenvalues[order[start + off]]);
            columns.push(v);
        }
        start = end;
    }
    let basis = CMatrix::from_fn(n, |i, j| columns[j][i]);
    Ok(HermDecomp { eigenvalues, basis })
}

fn psd_checked_decomp(h: &CMatrix, tol: &Tolerances) -> Result<HermDecomp> {
    let d = herm_eig(h, tol)?;
    if d.min_eigenvalue() < -tol.eps_psd {
        return Err(Error::NotPsd {
            min_eigenvalue: d.min_eigenvalue(),
        });
    }
    Ok(d)
}

/// H^{it} for PSD H with the kernel convention 0^{it} := 0: eigenvalues at or
/// below the rank cutoff map to 0, so the result is a partial isometry whose
/// initial and final projections equal the support of H.
pub fn power_it(h: &CMatrix, t: f64, tol: &Tolerances) -> Result<CMatrix> {
    let d = psd_checked_decomp(h, tol)?;
    Ok(d.imaginary_power(t, tol.eps_rank(h.dim())))
}

/// Real power of a PSD matrix with the kernel convention (negative powers act
/// as pseudo-inverses on the support).
pub fn psd_power(h: &CMatrix, p: f64, tol: &Tolerances) -> Result<CMatrix> {
    let cut = tol.eps_rank(h.dim());
    let d = psd_checked_decomp(h, tol)?;
    Ok(d.map(|l| {
        if l > cut {
            C64::new(l.powf(p), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// Functional calculus for a total function on the spectrum (no kernel
/// convention; eigenvalues are used as-is).
pub fn herm_map(h: &CMatrix, tol: &Tolerances, f: impl Fn(f64) -> C64) -> Result<CMatrix> {
    Ok(herm_eig(h, tol)?.map(f))
}

/// Spectral projection of a PSD matrix onto eigenvalues above the rank cutoff.
pub fn support_of(h: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let d = psd_checked_decomp(h, tol)?;
    Ok(d.support(tol.eps_rank(h.dim())))
}

/// Complex Ginibre matrix: independent entries (N(0,1) + i N(0,1)) / sqrt(2).
pub fn random_gaussian<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::new_unchecked(DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    }))
}

/// Haar-distributed unitary via Gram-Schmidt on a Ginibre matrix with the
/// R-diagonal phase fixed positive.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_gaussian(n, rng);
    let mut cols: Vec<DVector<C64>> = (0..n).map(|j| g.inner.column(j).into_owned()).collect();
    for j in 0..n {
        for i in 0..j {
            let c = cols[i].dotc(&cols[j]);
            let corr = &cols[i] * c;
            cols[j] -= corr;
        }
        let nn = cols[j].norm();
        cols[j] = cols[j].unscale(nn);
    }
    CMatrix::from_fn(n, |i, j| cols[j][i])
}

/// Random faithful density: G G* / tr(G G*).
pub fn random_density<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_gaussian(n, rng);
    let p = &g * &g.adjoint();
    let tr = p.trace().re;
    p.scale(C64::new(1.0 / tr, 0.0))
}

/// U diag(spectrum) U*.
pub fn density_from_spectrum(u: &CMatrix, spectrum: &[f64]) -> CMatrix {
    let d = CMatrix::from_real_diag(spectrum);
    &(u * &d) * &u.adjoint()
}
