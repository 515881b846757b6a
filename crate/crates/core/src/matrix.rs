//! Real symmetric `2n × 2n` matrices, the complex structure `J`, the
//! Hermitian embedding and the J-invariant projection, plus the determinant
//! operator `F(M) = det(proj M)^{1/2n}`.
//!
//! Coordinates on R^{2n} are ordered `(x_1..x_n, y_1..y_n)` so that
//! `J = [[0, -I], [I, 0]]` and a Hermitian `H = A + iB` embeds as
//! `[[A, -B], [B, A]]`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::eigen::{jacobi_eigen, SymmetricEigen};
use crate::error::{Error, Result};

/// Largest supported real dimension `2n`.
pub const MAX_DIM: usize = 16;

/// Inputs whose max-entry asymmetry exceeds this are rejected.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl fmt::Debug for SymmetricMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for r in self.rows() {
            list.entry(&r);
        }
        list.finish()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || !dim.is_multiple_of(2) || dim > MAX_DIM {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(())
}

impl SymmetricMatrix {
    /// Builds from row-major entries. Asymmetry up to [`SYMMETRY_TOL`]
    /// (scaled by the largest entry when that exceeds one) is averaged away.
    pub fn from_row_major(dim: usize, entries: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::EntryCount {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if let Some(pos) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        let scale = entries.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let mut asym: f64 = 0.0;
        for i in 0..dim {
            for j in 0..i {
                asym = asym.max((entries[i * dim + j] - entries[j * dim + i]).abs());
            }
        }
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self::symmetrized(dim, entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::EntryCount {
                expected: dim,
                found: bad.len(),
            });
        }
        Self::from_row_major(dim, rows.concat())
    }

    pub(crate) fn symmetrized(dim: usize, mut entries: Vec<f64>) -> Self {
        for i in 0..dim {
            for j in 0..i {
                let avg = 0.5 * (entries[i * dim + j] + entries[j * dim + i]);
                entries[i * dim + j] = avg;
                entries[j * dim + i] = avg;
            }
        }
        SymmetricMatrix { dim, entries }
    }

    /// Builds `(f(i, j) + f(j, i)) / 2`. Panics on an invalid dimension.
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        check_dim(dim).expect("SymmetricMatrix::from_fn");
        let entries = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Self::symmetrized(dim, entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| 0.0)
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, t: f64) -> Self {
        Self::from_fn(dim, |i, j| if i == j { t } else { 0.0 })
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        check_dim(diag.len())?;
        Ok(Self::from_fn(diag.len(), |i, j| {
            if i == j {
                diag[i]
            } else {
                0.0
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Complex dimension `n = dim / 2`.
    pub fn n(&self) -> usize {
        self.dim / 2
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.dim)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, t: f64) -> Self {
        SymmetricMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|x| t * x).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff: dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `W M Wᵀ` for a row-major `dim × dim` matrix `w`.
    pub fn conjugated(&self, w: &[f64]) -> Self {
        let d = self.dim;
        assert_eq!(w.len(), d * d, "conjugated: dimension mismatch");
        let mut wm = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let wik = w[i * d + k];
                if wik != 0.0 {
                    for j in 0..d {
                        wm[i * d + j] += wik * self.entries[k * d + j];
                    }
                }
            }
        }
        Self::from_fn(d, |i, j| (0..d).map(|k| wm[i * d + k] * w[j * d + k]).sum())
    }

    pub fn eigen(&self) -> Result<SymmetricEigen> {
        jacobi_eigen(&self.entries, self.dim)
    }
}

impl Add for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn add(self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
        assert_eq!(self.dim, rhs.dim, "add: dimension mismatch");
        SymmetricMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn sub(self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
        assert_eq!(self.dim, rhs.dim, "sub: dimension mismatch");
        SymmetricMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul<&SymmetricMatrix> for f64 {
    type Output = SymmetricMatrix;
    fn mul(self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
        rhs.scaled(self)
    }
}

/// `H = A + iB` stored as the real pair `(A, B)`, `A` symmetric and `B`
/// antisymmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl HermitianMatrix {
    pub fn new(n: usize, re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        check_dim(2 * n)?;
        for block in [&re, &im] {
            if block.len() != n * n {
                return Err(Error::EntryCount {
                    expected: n * n,
                    found: block.len(),
                });
            }
        }
        if let Some(pos) = re.iter().chain(&im).position(|x| !x.is_finite()) {
            let pos = pos % (n * n);
            return Err(Error::NonFinite {
                row: pos / n,
                col: pos % n,
            });
        }
        let scale = re.iter().chain(&im).fold(1.0f64, |m, x| m.max(x.abs()));
        let mut defect: f64 = 0.0;
        for i in 0..n {
            defect = defect.max(im[i * n + i].abs());
            for j in 0..i {
                defect = defect.max((re[i * n + j] - re[j * n + i]).abs());
                defect = defect.max((im[i * n + j] + im[j * n + i]).abs());
            }
        }
        if defect > SYMMETRY_TOL * scale {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self::symmetrized(n, re, im))
    }

    fn symmetrized(n: usize, mut re: Vec<f64>, mut im: Vec<f64>) -> Self {
        for i in 0..n {
            im[i * n + i] = 0.0;
            for j in 0..i {
                let a = 0.5 * (re[i * n + j] + re[j * n + i]);
                re[i * n + j] = a;
                re[j * n + i] = a;
                let b = 0.5 * (im[i * n + j] - im[j * n + i]);
                im[i * n + j] = b;
                im[j * n + i] = -b;
            }
        }
        HermitianMatrix { n, re, im }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        check_dim(2 * n).expect("HermitianMatrix::diagonal");
        let mut re = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            re[i * n + i] = *d;
        }
        HermitianMatrix {
            n,
            re,
            im: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn real_part(&self) -> &[f64] {
        &self.re
    }

    pub fn imag_part(&self) -> &[f64] {
        &self.im
    }

    /// Entry `(i, j)` as `(re, im)`.
    pub fn get(&self, i: usize, j: usize) -> (f64, f64) {
        (self.re[i * self.n + j], self.im[i * self.n + j])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.re
            .iter()
            .zip(&other.re)
            .chain(self.im.iter().zip(&other.im))
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// The canonical complex structure on R^{2n}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexStructure {
    n: usize,
}

impl ComplexStructure {
    pub fn new(n: usize) -> Self {
        ComplexStructure { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row-major `[[0, -I], [I, 0]]`.
    pub fn matrix(&self) -> Vec<f64> {
        let d = 2 * self.n;
        let mut j = vec![0.0; d * d];
        for i in 0..self.n {
            j[i * d + (i + self.n)] = -1.0;
            j[(i + self.n) * d + i] = 1.0;
        }
        j
    }

    /// `J v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..2 * n)
            .map(|i| if i < n { -v[i + n] } else { v[i - n] })
            .collect()
    }

    /// Max-entry norm of `MJ - JM`.
    pub fn commutator_norm(&self, m: &SymmetricMatrix) -> f64 {
        let n = self.n;
        assert_eq!(m.dim(), 2 * n, "commutator_norm: dimension mismatch");
        let d = 2 * n;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for k in 0..d {
                // (MJ)_{ik} = M_{i,k+n} for k < n, -M_{i,k-n} otherwise
                let mj = if k < n {
                    m.get(i, k + n)
                } else {
                    -m.get(i, k - n)
                };
                // (JM)_{ik} = -M_{i+n,k} for i < n, M_{i-n,k} otherwise
                let jm = if i < n {
                    -m.get(i + n, k)
                } else {
                    m.get(i - n, k)
                };
                worst = worst.max((mj - jm).abs());
            }
        }
        worst
    }
}

/// Sorted real eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    pub values: Vec<f64>,
}

impl EigenSpectrum {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `ι(A + iB) = [[A, -B], [B, A]]`.
pub fn embed(h: &HermitianMatrix) -> SymmetricMatrix {
    let n = h.n;
    SymmetricMatrix::from_fn(2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        let a = h.re[ii * n + jj];
        let b = h.im[ii * n + jj];
        match (bi, bj) {
            (0, 0) | (1, 1) => a,
            (0, 1) => -b,
            _ => b,
        }
    })
}

/// Inverse of [`embed`] on the J-commuting subspace.
pub fn extract(m: &SymmetricMatrix, tol: f64) -> Result<HermitianMatrix> {
    let n = m.n();
    let defect = ComplexStructure::new(n).commutator_norm(m);
    if defect > tol {
        return Err(Error::NotJCommuting(defect));
    }
    Ok(hermitian_part(m))
}

/// Reads `(A, B)` off the blocks of `proj(M)` without any commutation check.
fn hermitian_part(m: &SymmetricMatrix) -> HermitianMatrix {
    let n = m.n();
    let mut re = vec![0.0; n * n];
    let mut im = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            re[i * n + j] = 0.5 * (m.get(i, j) + m.get(i + n, j + n));
            im[i * n + j] = 0.5 * (m.get(i + n, j) - m.get(i, j + n));
        }
    }
    HermitianMatrix::symmetrized(n, re, im)
}

/// `proj(M) = (M + Jᵀ M J) / 2`, the orthogonal projection onto the
/// J-commuting subspace.
pub fn project(m: &SymmetricMatrix) -> SymmetricMatrix {
    embed(&hermitian_part(m))
}

/// `tr(AB)`.
pub fn trace_inner(a: &SymmetricMatrix, b: &SymmetricMatrix) -> f64 {
    assert_eq!(a.dim, b.dim, "trace_inner: dimension mismatch");
    a.entries.iter().zip(&b.entries).map(|(x, y)| x * y).sum()
}

/// Hermitian trace pairing `Re tr_C(H_A H_B)` of the J-invariant parts,
/// equal to `tr(proj(A) B) / 2`.
pub fn hermitian_pairing(a: &SymmetricMatrix, b: &SymmetricMatrix) -> f64 {
    0.5 * trace_inner(&project(a), b)
}

/// Largest absolute eigenvalue.
pub fn spectral_norm(p: &SymmetricMatrix) -> Result<f64> {
    let e = p.eigen()?;
    Ok(e.values.iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// The `n` eigenvalues of `H`, ascending. Computed on the real embedding,
/// where each value appears twice; pairs are averaged.
pub fn herm_eigenvalues(h: &HermitianMatrix) -> Result<EigenSpectrum> {
    let e = embed(h).eigen()?;
    Ok(EigenSpectrum {
        values: collapse_pairs(&e.values),
    })
}

pub(crate) fn collapse_pairs(values: &[f64]) -> Vec<f64> {
    values.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// Hermitian eigenvalues of `proj(M)`.
pub fn projected_spectrum(m: &SymmetricMatrix) -> Result<EigenSpectrum> {
    herm_eigenvalues(&hermitian_part(m))
}

/// `(∏ μ_i)^{1/n}` over the Hermitian eigenvalues, in log space.
pub(crate) fn geometric_mean(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    (values.iter().map(|v| v.ln()).sum::<f64>() / n).exp()
}

/// `F(M) = det_R(proj M)^{1/2n} = det_C(H)^{1/n}`.
pub fn operator_f(m: &SymmetricMatrix) -> Result<f64> {
    let spec = projected_spectrum(m)?;
    if spec.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite(spec.min()));
    }
    Ok(geometric_mean(&spec.values))
}

/// Whether every eigenvalue of `proj(M)` lies in `[θ - tol, 1/θ + tol]`.
pub fn in_theta_box(m: &SymmetricMatrix, theta: f64, tol: f64) -> bool {
    match projected_spectrum(m) {
        Ok(s) => s.min() >= theta - tol && s.max() <= 1.0 / theta + tol,
        Err(_) => false,
    }
}

/// `θ = min(λ, 1/Λ)` for Hessian bounds `λ I ≤ proj(D²u) ≤ Λ I`.
pub fn admissible_theta(lower: f64, upper: f64) -> Result<f64> {
    if !(lower > 0.0 && upper > 0.0 && lower.is_finite() && upper.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "Hessian bounds must be positive and finite (got {lower}, {upper})"
        )));
    }
    if lower > upper {
        return Err(Error::InvalidArgument(format!(
            "lower Hessian bound {lower} exceeds upper bound {upper}"
        )));
    }
    Ok(lower.min(1.0 / upper))
}
