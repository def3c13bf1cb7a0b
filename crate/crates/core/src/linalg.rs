//! Dense complex linear algebra.
//!
//! [`ComplexMatrix`] wraps a column-major `nalgebra` matrix; products go
//! through `matrixmultiply`'s complex GEMM, Hermitian eigendecompositions
//! through `nalgebra`. Tensor products are system-major throughout: in
//! `kron(A, B)` the index of `A` varies slowest.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use matrixmultiply::CGemmOption;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Relative Hermiticity tolerance used to pick the eigendecomposition
/// exponential path.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues in `[-PSD_CLAMP_TOL, 0)` are clamped to zero; anything lower
/// is rejected as not positive semidefinite.
pub const PSD_CLAMP_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from entries listed row by row.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, entries)))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn from_nalgebra(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> f64 {
        self.0
            .column_iter()
            .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |M - M†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Hermitian within `rel_tol · max|M|`.
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.is_square() && self.hermiticity_residual() <= rel_tol * self.max_abs()
    }

    /// Max-norm distance to another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self(gemm(&self.0, &other.0))
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(self.matmul(other))
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols(), v.len(), "vector length mismatch");
        let mut out = vec![ZERO; self.rows()];
        for (j, &vj) in v.iter().enumerate() {
            if vj == ZERO {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.0.column(j).iter()) {
                *o += a * vj;
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.0.column(j).iter().copied().collect()
    }

    /// Sub-block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self(self.0.view((r0, c0), (rows, cols)).into_owned())
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Eigendecomposition of a Hermitian matrix. The input is symmetrized
    /// first; eigenvalues come back in ascending order.
    pub fn eigh(&self) -> Result<HermitianEigen> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "eigendecomposition of non-square {}x{} matrix",
                self.rows(),
                self.cols()
            )));
        }
        let n = self.rows();
        if n == 0 {
            return Ok(HermitianEigen {
                values: Vec::new(),
                vectors: Self::zeros(0, 0),
            });
        }
        let eig = SymmetricEigen::new(self.hermitian_part().0);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite eigenvalue".into()));
        }
        let vectors = Self::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(HermitianEigen { values, vectors })
    }
}

/// Complex GEMM on column-major storage.
fn gemm(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = DMatrix::<C64>::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // SAFETY: Complex<f64> is #[repr(C)] { re, im }, layout-identical to
    // [f64; 2]. Strides describe the contiguous column-major buffers and the
    // output does not alias the inputs.
    unsafe {
        matrixmultiply::zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

impl Add<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 + rhs.0)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.0 += &rhs.0;
    }
}

impl Sub<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 - rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        self.matmul(&rhs)
    }
}

/// Spectral decomposition `M = V diag(λ) V†`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V diag(f(λ)) V†`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * fv[j]);
        scaled.matmul(&self.vectors.adjoint())
    }

    /// `V diag(f(λ)) V† v` without forming the matrix.
    pub fn apply_fn_to_vec(&self, f: impl Fn(f64) -> C64, v: &[C64]) -> Vec<C64> {
        let coeffs = self.vectors.adjoint().mul_vec(v);
        let weighted: Vec<C64> = coeffs
            .iter()
            .zip(&self.values)
            .map(|(c, &l)| c * f(l))
            .collect();
        self.vectors.mul_vec(&weighted)
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// `e^{scale·M}`. Hermitian inputs use the eigendecomposition, everything
/// else Padé scaling and squaring.
pub fn matrix_exp(m: &ComplexMatrix, scale: C64) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "matrix exponential of non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if m.is_hermitian(HERMITIAN_TOL) {
        expm_hermitian(m, scale)
    } else {
        expm_pade(&m.scale(scale))
    }
}

/// `e^{scale·H}` for Hermitian `H` via its eigendecomposition.
pub fn expm_hermitian(h: &ComplexMatrix, scale: C64) -> Result<ComplexMatrix> {
    Ok(h.eigh()?.apply_fn(|l| (scale * l).exp()))
}

const PADE_THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

fn pade_coefficients(m: usize) -> &'static [f64] {
    match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[
            17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
        ],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        13 => &[
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ],
        _ => unreachable!("unsupported Padé degree"),
    }
}

/// General matrix exponential: scaling and squaring with a diagonal Padé
/// approximant of degree 3, 5, 7, 9 or 13 chosen from the 1-norm.
pub fn expm_pade(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension("matrix exponential of non-square matrix".into()));
    }
    let n = a.rows();
    let norm = a.norm_one();
    if !norm.is_finite() {
        return Err(Error::Numerical("non-finite entries in exponent".into()));
    }
    let ident = ComplexMatrix::identity(n);
    let re = |x: f64| C64::new(x, 0.0);

    for &(m, theta) in &PADE_THETA {
        if norm <= theta {
            let b = pade_coefficients(m);
            let a2 = a.matmul(a);
            let mut powers = vec![ident.clone(), a2.clone()];
            for _ in 2..=m / 2 {
                let next = powers.last().unwrap().matmul(&a2);
                powers.push(next);
            }
            let mut u_inner = ComplexMatrix::zeros(n, n);
            let mut v = ComplexMatrix::zeros(n, n);
            for (k, p) in powers.iter().enumerate() {
                u_inner += &p.scale(re(b[2 * k + 1]));
                v += &p.scale(re(b[2 * k]));
            }
            let u = a.matmul(&u_inner);
            return pade_solve(&u, &v);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a.scale_real(0.5f64.powi(s));
    let b = pade_coefficients(13);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> ComplexMatrix {
        let mut out = a6.scale(re(c6));
        out += &a4.scale(re(c4));
        out += &a2.scale(re(c2));
        if c0 != 0.0 {
            out += &ident.scale(re(c0));
        }
        out
    };
    let u_inner = &a6.matmul(&lin(b[13], b[11], b[9], 0.0)) + &lin(b[7], b[5], b[3], b[1]);
    let u = a.matmul(&u_inner);
    let v = &a6.matmul(&lin(b[12], b[10], b[8], 0.0)) + &lin(b[6], b[4], b[2], b[0]);
    let mut x = pade_solve(&u, &v)?;
    for _ in 0..s {
        x = x.matmul(&x);
    }
    Ok(x)
}

fn pade_solve(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let p = v + u;
    let q = v - u;
    q.0.lu()
        .solve(&p.0)
        .map(ComplexMatrix)
        .ok_or_else(|| Error::Numerical("singular Padé denominator".into()))
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = m.eigh()?;
    check_psd(&eig.values)?;
    Ok(eig.apply_fn(|l| C64::new(l.max(0.0).sqrt(), 0.0)))
}

fn check_psd(values: &[f64]) -> Result<()> {
    match values.iter().copied().find(|&l| l < -PSD_CLAMP_TOL) {
        Some(bad) => Err(Error::NotPsd(bad)),
        None => Ok(()),
    }
}

/// Traces out the bath factor of a system-major `(dS·dB)×(dS·dB)` operator.
pub fn partial_trace_bath(m: &ComplexMatrix, dim_s: usize, dim_b: usize) -> Result<ComplexMatrix> {
    let d = dim_s * dim_b;
    if m.rows() != d || m.cols() != d {
        return Err(Error::Dimension(format!(
            "partial trace expects {d}x{d}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(ComplexMatrix::from_fn(dim_s, dim_s, |s, sp| {
        (0..dim_b).map(|b| m[(s * dim_b + b, sp * dim_b + b)]).sum()
    }))
}

/// Reduced system state of a pure joint vector, `tr_B |Ψ⟩⟨Ψ|`.
pub fn reduced_from_pure(psi: &[C64], dim_s: usize, dim_b: usize) -> Result<ComplexMatrix> {
    if psi.len() != dim_s * dim_b {
        return Err(Error::Dimension(format!(
            "joint vector of length {} for {dim_s}x{dim_b} split",
            psi.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(dim_s, dim_s, |s, sp| {
        (0..dim_b)
            .map(|b| psi[s * dim_b + b] * psi[sp * dim_b + b].conj())
            .sum()
    }))
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Normalizes the given amplitudes.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let nrm = norm(&amplitudes);
        if amplitudes.is_empty() || !nrm.is_finite() || nrm == 0.0 {
            return Err(Error::InvalidData("state vector has zero or non-finite norm".into()));
        }
        let inv = 1.0 / nrm;
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z * inv).collect(),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Dimension(format!("basis index {index} out of range {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { amplitudes: amps })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            amplitudes: kron_vec(&self.amplitudes, &other.amplitudes),
        }
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }
}

/// Nested `[re, im]` rows, the JSON layout for dense matrices.
pub type JsonRows = Vec<Vec<[f64; 2]>>;

impl ComplexMatrix {
    pub fn to_json_rows(&self) -> JsonRows {
        (0..self.rows())
            .map(|r| (0..self.cols()).map(|c| [self[(r, c)].re, self[(r, c)].im]).collect())
            .collect()
    }

    pub fn from_json_rows(rows: &JsonRows) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::InvalidData("ragged matrix rows".into()));
        }
        Ok(Self::from_fn(n_rows, n_cols, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
    }
}

/// A validated density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Checks Hermiticity (1e-12), unit trace (1e-10) and positivity
    /// (eigenvalues ≥ -1e-10).
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension("density matrix must be square".into()));
        }
        let herm = m.hermiticity_residual();
        if herm > 1e-12 {
            return Err(Error::InvalidData(format!(
                "density matrix not Hermitian (residual {herm:e})"
            )));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > 1e-10 {
            return Err(Error::InvalidData(format!("density matrix trace {tr} differs from 1")));
        }
        check_psd(&m.eigh()?.values)?;
        Ok(Self(m))
    }

    /// Wraps a matrix that is a density matrix by construction, without
    /// re-validating it.
    pub(crate) fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        Self(psi.projector())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn purity(&self) -> f64 {
        let m = &self.0;
        m.as_nalgebra().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn sqrt(&self) -> Result<ComplexMatrix> {
        psd_sqrt(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap()
    }

    /// Deterministic pseudo-random entries, independent of the `rand` stack.
    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        ComplexMatrix::from_fn(rows, cols, |_, _| c(next(), next()))
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = matrix_exp(&ComplexMatrix::zeros(3, 3), c(0.0, -1.0)).unwrap();
        assert!(e.max_abs_diff(&ComplexMatrix::identity(3)) == 0.0);
    }

    #[test]
    fn exp_of_sigma_z_rotation() {
        let theta = 0.731;
        let e = matrix_exp(&sigma_z(), c(0.0, -theta)).unwrap();
        let want = ComplexMatrix::from_diagonal(&[c(0.0, -theta).exp(), c(0.0, theta).exp()]);
        assert!(e.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn pade_matches_eigendecomposition_for_hermitian() {
        let x = lcg_matrix(8, 8, 7);
        let h = x.hermitian_part();
        for &t in &[0.01, 0.3, 2.0, 9.0] {
            let scale = c(0.0, -t);
            let oracle = h.eigh().unwrap().apply_fn(|l| (scale * l).exp());
            let pade = expm_pade(&h.scale(scale)).unwrap();
            assert!(pade.max_abs_diff(&oracle) < 1e-11, "t={t}");
        }
    }

    #[test]
    fn pade_handles_nilpotent_block() {
        // exp([[0, 1], [0, 0]]) = [[1, 1], [0, 1]]
        let n = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let e = matrix_exp(&n, ONE).unwrap();
        let want = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(e.max_abs_diff(&want) < 1e-15);
        let big = matrix_exp(&n, c(40.0, 0.0)).unwrap();
        assert!((big[(0, 1)] - c(40.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn non_square_exp_is_dimension_error() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(matrix_exp(&m, ONE), Err(Error::Dimension(_))));
    }

    #[test]
    fn sqrt_of_maximally_mixed_qubit() {
        let r = DensityMatrix::maximally_mixed(2).sqrt().unwrap();
        let want = ComplexMatrix::identity(2).scale_real(1.0 / 2f64.sqrt());
        assert!(r.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn sqrt_of_projector_is_itself() {
        let p = StateVector::basis(2, 0).unwrap().projector();
        assert!(psd_sqrt(&p).unwrap().max_abs_diff(&p) < 1e-15);
    }

    #[test]
    fn sqrt_of_rank_deficient_psd() {
        let x = lcg_matrix(4, 2, 3);
        let m = x.matmul(&x.adjoint());
        let r = psd_sqrt(&m).unwrap();
        assert!(r.matmul(&r).max_abs_diff(&m) < 1e-10);
        assert!(r.hermiticity_residual() < 1e-12);
    }

    #[test]
    fn sqrt_rejects_negative_eigenvalue() {
        let m = ComplexMatrix::from_diagonal(&[ONE, c(-1e-6, 0.0)]);
        assert!(matches!(psd_sqrt(&m), Err(Error::NotPsd(_))));
        let tiny = ComplexMatrix::from_diagonal(&[ONE, c(-1e-12, 0.0)]);
        assert!(psd_sqrt(&tiny).is_ok());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho_s = ComplexMatrix::from_real_rows(&[&[0.7, 0.1], &[0.1, 0.3]]).unwrap();
        let rho_b = ComplexMatrix::from_diagonal(&[c(0.2, 0.0), c(0.5, 0.0), c(0.3, 0.0)]);
        let joint = kron(&rho_s, &rho_b);
        let red = partial_trace_bath(&joint, 2, 3).unwrap();
        assert!(red.max_abs_diff(&rho_s) < 1e-15);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let s = 1.0 / 2f64.sqrt();
        let bell = StateVector::new(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)]).unwrap();
        let red = partial_trace_bath(&bell.projector(), 2, 2).unwrap();
        assert!(red.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_matches_index_loop() {
        let m = lcg_matrix(6, 6, 11);
        let red = partial_trace_bath(&m, 2, 3).unwrap();
        for s in 0..2 {
            for sp in 0..2 {
                let mut acc = ZERO;
                for b in 0..3 {
                    acc += m[(s * 3 + b, sp * 3 + b)];
                }
                assert!((acc - red[(s, sp)]).norm() < 1e-15);
            }
        }
        assert!((red.trace() - m.trace()).norm() < 1e-14);
        assert!(partial_trace_bath(&m, 2, 2).is_err());
    }

    #[test]
    fn kron_conventions() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let zi = kron(&sigma_z(), &i2);
        let want = ComplexMatrix::from_diagonal(&[ONE, ONE, -ONE, -ONE]);
        assert_eq!(zi, want);
    }

    #[test]
    fn gemm_matches_nalgebra() {
        let a = lcg_matrix(5, 7, 1);
        let b = lcg_matrix(7, 3, 2);
        let want = ComplexMatrix::from_nalgebra(a.as_nalgebra() * b.as_nalgebra());
        assert!(a.matmul(&b).max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace = ComplexMatrix::identity(2);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let nonherm = ComplexMatrix::from_fn(2, 2, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => ONE,
            std::cmp::Ordering::Equal => c(0.5, 0.0),
            std::cmp::Ordering::Greater => ZERO,
        });
        assert!(DensityMatrix::new(nonherm).is_err());
        assert!(DensityMatrix::new(DensityMatrix::maximally_mixed(3).into_matrix()).is_ok());
    }
}
