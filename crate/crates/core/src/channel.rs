//! Kraus operators of the reduced dynamics and their ε-expansion.
//!
//! `A_i(ε,t) = ⟨φ_i| e^{-itH(ε)} |φ₀⟩`, with `{φ_i}` the model's bath basis
//! (initial bath state first). The ε-derivatives come from exponentiating
//! block upper-triangular matrices
//!
//! ```text
//! exp [[X, E, 0],      [[e^X, L₁, L₂ ],
//!      [0, X, E],   =   [0,   e^X, L₁],
//!      [0, 0, X]]       [0,   0,   e^X]]
//! ```
//!
//! with `X = -itH₀`, `E = -itV`, so that `e^{X+εE} = e^X + εL₁ + ε²L₂ + O(ε³)`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, expm_pade, ComplexMatrix, DensityMatrix};
use crate::operators::{assemble_joint_hamiltonian, ModelSpec};

/// Kraus operators at fixed `t` together with their first (and optionally
/// second) ε-Taylor coefficients at ε = 0.
#[derive(Clone, Debug)]
pub struct KrausExpansion {
    pub t: f64,
    pub order0: Vec<ComplexMatrix>,
    pub order1: Vec<ComplexMatrix>,
    pub order2: Option<Vec<ComplexMatrix>>,
}

impl KrausExpansion {
    /// Truncated series `A⁽⁰⁾ + εA⁽¹⁾ (+ ε²A⁽²⁾)`.
    pub fn evaluate(&self, epsilon: f64) -> Vec<ComplexMatrix> {
        let e = C64::new(epsilon, 0.0);
        self.order0
            .iter()
            .enumerate()
            .map(|(i, a0)| {
                let mut a = a0 + &self.order1[i].scale(e);
                if let Some(o2) = &self.order2 {
                    a += &o2[i].scale(e * e);
                }
                a
            })
            .collect()
    }

    /// `max |Σ_i (A⁽⁰⁾†A⁽¹⁾ + A⁽¹⁾†A⁽⁰⁾)|`.
    pub fn first_order_residual(&self) -> f64 {
        let d = self.order0[0].rows();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (a0, a1) in self.order0.iter().zip(&self.order1) {
            let x = a0.adjoint().matmul(a1);
            acc += &x;
            acc += &x.adjoint();
        }
        acc.max_abs()
    }

    /// `max |Σ_i (A⁽⁰⁾†A⁽²⁾ + A⁽¹⁾†A⁽¹⁾ + A⁽²⁾†A⁽⁰⁾)|`, if second order was
    /// computed.
    pub fn second_order_residual(&self) -> Option<f64> {
        let o2 = self.order2.as_ref()?;
        let d = self.order0[0].rows();
        let mut acc = ComplexMatrix::zeros(d, d);
        for ((a0, a1), a2) in self.order0.iter().zip(&self.order1).zip(o2) {
            let x = a0.adjoint().matmul(a2);
            acc += &x;
            acc += &x.adjoint();
            acc += &a1.adjoint().matmul(a1);
        }
        Some(acc.max_abs())
    }
}

/// Contracts a joint operator with `|φ₀⟩` on the right and each basis bra
/// `⟨φ_i|` on the left: `K_i = (1⊗⟨φ_i|) U (1⊗|φ₀⟩)`.
pub(crate) fn slice_kraus(
    u: &ComplexMatrix,
    dim_s: usize,
    basis: &ComplexMatrix,
    phi0: &[C64],
) -> Vec<ComplexMatrix> {
    let dim_b = phi0.len();
    let d = dim_s * dim_b;
    let right = ComplexMatrix::from_fn(d, dim_s, |r, s| {
        if r / dim_b == s {
            phi0[r % dim_b]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    slice_rows(&u.matmul(&right), dim_s, basis)
}

/// Splits a `(dS·dB)×dS` matrix into `dB` system blocks along the bath basis.
pub(crate) fn slice_rows(c: &ComplexMatrix, dim_s: usize, basis: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let dim_b = basis.rows();
    (0..dim_b)
        .map(|i| {
            ComplexMatrix::from_fn(dim_s, c.cols(), |sp, s| {
                (0..dim_b)
                    .map(|b| basis[(b, i)].conj() * c[(sp * dim_b + b, s)])
                    .sum()
            })
        })
        .collect()
}

pub fn extract_kraus(m: &ModelSpec, epsilon: f64, t: f64) -> Result<Vec<ComplexMatrix>> {
    extract_kraus_in_basis(m, epsilon, t, &m.bath_basis())
}

/// Kraus operators with respect to an arbitrary orthonormal bath basis
/// (columns of `basis`).
pub fn extract_kraus_in_basis(
    m: &ModelSpec,
    epsilon: f64,
    t: f64,
    basis: &ComplexMatrix,
) -> Result<Vec<ComplexMatrix>> {
    if basis.rows() != m.bath_dim() || basis.cols() != m.bath_dim() {
        return Err(Error::Dimension("bath basis must be dB x dB".into()));
    }
    let h = assemble_joint_hamiltonian(m, epsilon)?;
    let u = expm_hermitian(&h, C64::new(0.0, -t))?;
    Ok(slice_kraus(&u, m.system_dim(), basis, m.bath_initial().amplitudes()))
}

/// Exact first (`order == 1`) or first and second (`order == 2`)
/// ε-derivatives of the Kraus operators at ε = 0.
pub fn kraus_epsilon_derivatives(m: &ModelSpec, t: f64, order: usize) -> Result<KrausExpansion> {
    if !(1..=2).contains(&order) {
        return Err(Error::Config(format!("derivative order must be 1 or 2, got {order}")));
    }
    m.check_capacity()?;
    let dim_s = m.system_dim();
    let d = m.joint_dim();
    let basis = m.bath_basis();
    let phi0 = m.bath_initial().amplitudes();
    let zeros = || vec![ComplexMatrix::zeros(dim_s, dim_s); m.bath_dim()];

    if m.v().is_zero() {
        let order0 = extract_kraus(m, 0.0, t)?;
        return Ok(KrausExpansion {
            t,
            order0,
            order1: zeros(),
            order2: (order == 2).then(zeros),
        });
    }

    let scale = C64::new(0.0, -t);
    let x = m.h0_dense()?.scale(scale);
    let e = m.v_dense()?.scale(scale);
    let blocks = order + 1;
    let mut aug = ComplexMatrix::zeros(blocks * d, blocks * d);
    for k in 0..blocks {
        for i in 0..d {
            for j in 0..d {
                aug[(k * d + i, k * d + j)] = x[(i, j)];
                if k + 1 < blocks {
                    aug[(k * d + i, (k + 1) * d + j)] = e[(i, j)];
                }
            }
        }
    }
    let big = expm_pade(&aug)?;
    let take = |k: usize| slice_kraus(&big.block(0, k * d, d, d), dim_s, &basis, phi0);
    Ok(KrausExpansion {
        t,
        order0: take(0),
        order1: take(1),
        order2: (order == 2).then(|| take(2)),
    })
}

/// `Σ_i A_i ρ A_i†`.
pub fn apply_channel(kraus: &[ComplexMatrix], rho: &DensityMatrix) -> Result<DensityMatrix> {
    let n = rho.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for a in kraus {
        if a.cols() != n || a.rows() != n {
            return Err(Error::Dimension(format!(
                "Kraus operator {}x{} applied to {n}x{n} state",
                a.rows(),
                a.cols()
            )));
        }
        out += &a.matmul(rho.matrix()).matmul(&a.adjoint());
    }
    Ok(DensityMatrix::from_matrix_unchecked(out.hermitian_part()))
}

/// `max |Σ_i A_i†A_i − 1|`.
pub fn completeness_residual(kraus: &[ComplexMatrix]) -> f64 {
    let n = kraus[0].cols();
    let mut acc = ComplexMatrix::identity(n).scale_real(-1.0);
    for a in kraus {
        acc += &a.adjoint().matmul(a);
    }
    acc.max_abs()
}

/// Step used for the central-difference derivative of `ρ_S(ε,t)`.
pub const RHO1_FD_STEP: f64 = 1e-5;

/// Max-norm difference between `Σ_j (A⁽⁰⁾ρA⁽¹⁾† + A⁽¹⁾ρA⁽⁰⁾†)` and the
/// central-difference ε-derivative of the reduced state.
pub fn rho1_identity_residual(m: &ModelSpec, rho_init: &DensityMatrix, t: f64) -> Result<f64> {
    let exp = kraus_epsilon_derivatives(m, t, 1)?;
    let n = rho_init.dim();
    if n != m.system_dim() {
        return Err(Error::Dimension("initial state does not match the register".into()));
    }
    let mut rho1 = ComplexMatrix::zeros(n, n);
    for (a0, a1) in exp.order0.iter().zip(&exp.order1) {
        let x = a0.matmul(rho_init.matrix()).matmul(&a1.adjoint());
        rho1 += &x;
        rho1 += &x.adjoint();
    }
    let h = RHO1_FD_STEP;
    let plus = apply_channel(&extract_kraus(m, h, t)?, rho_init)?;
    let minus = apply_channel(&extract_kraus(m, -h, t)?, rho_init)?;
    let fd = (plus.matrix() - minus.matrix()).scale_real(0.5 / h);
    Ok(fd.max_abs_diff(&rho1))
}
