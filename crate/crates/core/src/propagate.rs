//! Matrix-free action of `H(ε)` and `e^{-itH(ε)}` on joint state vectors.
//!
//! A joint vector is viewed as a `dS × dB` array (system index slowest), so
//! that `S⊗B` acts as `X ↦ S X Bᵀ` and no joint-space matrix is formed.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{norm, ComplexMatrix};
use crate::operators::{ModelSpec, SystemOperator};

/// Largest joint dimension handled without dense matrices.
pub const MATRIX_FREE_LIMIT: usize = 1 << 22;

const TAYLOR_TOL: f64 = 1e-17;
const MAX_TAYLOR_TERMS: usize = 80;

/// Applies a system operator to every bath column of `x` (length dS·dB).
fn apply_system(op: &SystemOperator, x: &[C64], dim_b: usize, out: &mut [C64], scale: C64) {
    let dim_s = x.len() / dim_b;
    for &(c, w) in op.terms() {
        let coef = c * scale;
        let flip = w.x_mask() as usize;
        for s in 0..dim_s {
            let phase = coef * w.phase_on(s as u64);
            let target = (s ^ flip) * dim_b;
            let src = s * dim_b;
            for b in 0..dim_b {
                out[target + b] += phase * x[src + b];
            }
        }
    }
}

/// Applies `1⊗B` (row-wise `X Bᵀ`), adding `scale·result` into `out`.
fn apply_bath(b_op: &ComplexMatrix, x: &[C64], dim_b: usize, out: &mut [C64], scale: C64) {
    for (row_in, row_out) in x.chunks(dim_b).zip(out.chunks_mut(dim_b)) {
        for (i, o) in row_out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (j, v) in row_in.iter().enumerate() {
                acc += b_op[(i, j)] * v;
            }
            *o += scale * acc;
        }
    }
}

/// Matrix-free `H(ε)` for a model.
pub struct JointHamiltonian<'a> {
    m: &'a ModelSpec,
    epsilon: f64,
}

impl<'a> JointHamiltonian<'a> {
    pub fn new(m: &'a ModelSpec, epsilon: f64) -> Result<Self> {
        if m.joint_dim() > MATRIX_FREE_LIMIT {
            return Err(Error::Capacity {
                what: "joint dimension (matrix-free)",
                requested: m.joint_dim(),
                limit: MATRIX_FREE_LIMIT,
            });
        }
        Ok(Self { m, epsilon })
    }

    pub fn dim(&self) -> usize {
        self.m.joint_dim()
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "joint vector of length {}, expected {}",
                x.len(),
                self.dim()
            )));
        }
        let dim_b = self.m.bath_dim();
        let one = C64::new(1.0, 0.0);
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        apply_system(self.m.h_s(), x, dim_b, &mut out, one);
        apply_bath(self.m.h_b(), x, dim_b, &mut out, one);
        let mut tmp = vec![C64::new(0.0, 0.0); x.len()];
        let mut coupling = |op: &crate::operators::CouplingOperator, scale: C64| {
            for t in op.terms() {
                tmp.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                apply_bath(&t.bath, x, dim_b, &mut tmp, one);
                apply_system(&t.system, &tmp, dim_b, &mut out, scale);
            }
        };
        coupling(self.m.h_sb(), one);
        if self.epsilon != 0.0 {
            coupling(self.m.v(), C64::new(self.epsilon, 0.0));
        }
        Ok(out)
    }

    /// Upper bound on the spectral norm from term coefficients and matrix
    /// 1- and ∞-norms.
    pub fn norm_bound(&self) -> f64 {
        let sys = |op: &SystemOperator| op.terms().iter().map(|(c, _)| c.norm()).sum::<f64>();
        let mat = |b: &ComplexMatrix| b.norm_one().max(b.adjoint().norm_one());
        let coupling = |op: &crate::operators::CouplingOperator| {
            op.terms().iter().map(|t| sys(&t.system) * mat(&t.bath)).sum::<f64>()
        };
        sys(self.m.h_s()) + mat(self.m.h_b()) + coupling(self.m.h_sb()) + self.epsilon.abs() * coupling(self.m.v())
    }

    /// `e^{-itH}x` by Taylor series on steps with `‖H‖·dt ≤ 1`.
    pub fn evolve(&self, x: &[C64], t: f64) -> Result<Vec<C64>> {
        let steps = (self.norm_bound() * t.abs()).ceil().max(1.0) as usize;
        let dt = t / steps as f64;
        let factor = C64::new(0.0, -dt);
        let mut state = x.to_vec();
        for _ in 0..steps {
            let mut term = state.clone();
            let mut sum = state.clone();
            let scale = norm(&state);
            let mut converged = false;
            for k in 1..=MAX_TAYLOR_TERMS {
                term = self.apply(&term)?;
                let f = factor / k as f64;
                term.iter_mut().for_each(|z| *z *= f);
                sum.iter_mut().zip(&term).for_each(|(s, z)| *s += z);
                if norm(&term) <= TAYLOR_TOL * scale {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Numerical("Taylor propagation did not converge".into()));
            }
            state = sum;
        }
        Ok(state)
    }
}

/// `e^{-itO}x` for a system operator acting on register vectors.
pub fn evolve_system(op: &SystemOperator, x: &[C64], t: f64) -> Result<Vec<C64>> {
    let bound: f64 = op.terms().iter().map(|(c, _)| c.norm()).sum();
    let steps = (bound * t.abs()).ceil().max(1.0) as usize;
    let factor = C64::new(0.0, -t / steps as f64);
    let mut state = x.to_vec();
    for _ in 0..steps {
        let mut term = state.clone();
        let mut sum = state.clone();
        let scale = norm(&state);
        for k in 1..=MAX_TAYLOR_TERMS {
            term = op.apply(&term)?;
            let f = factor / k as f64;
            term.iter_mut().for_each(|z| *z *= f);
            sum.iter_mut().zip(&term).for_each(|(s, z)| *s += z);
            if norm(&term) <= TAYLOR_TOL * scale {
                break;
            }
        }
        state = sum;
    }
    Ok(state)
}

/// Purity of the reduced register state of a pure joint vector, computed
/// from the `dB × dB` bath side of the Schmidt decomposition.
pub fn reduced_purity(joint: &[C64], dim_b: usize) -> f64 {
    let mut rho_b = ComplexMatrix::zeros(dim_b, dim_b);
    for row in joint.chunks(dim_b) {
        for i in 0..dim_b {
            for j in 0..dim_b {
                rho_b[(i, j)] += row[i] * row[j].conj();
            }
        }
    }
    rho_b.as_nalgebra().iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_hermitian, StateVector};
    use crate::operators::{assemble_joint_hamiltonian, boson_ops, BosonMode, CouplingOperator, Pauli};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn model() -> ModelSpec {
        let (a, ad) = boson_ops(&BosonMode::new("m", 3).unwrap()).unwrap();
        let hs = SystemOperator::new(
            2,
            [(c(0.3, 0.0), "XY".parse().unwrap()), (c(-0.7, 0.0), "ZI".parse().unwrap())],
        )
        .unwrap();
        let h_sb = CouplingOperator::single(SystemOperator::collective(2, Pauli::Z).unwrap(), &a + &ad).unwrap();
        let v = CouplingOperator::single(
            SystemOperator::staggered_z(2).unwrap(),
            (&a - &ad).scale(c(0.0, 1.0)),
        )
        .unwrap();
        ModelSpec::new(hs, ad.matmul(&a).scale_real(1.3), h_sb, v, StateVector::basis(3, 0).unwrap()).unwrap()
    }

    #[test]
    fn apply_matches_dense() {
        let m = model();
        let x: Vec<C64> = (0..12).map(|k| c((k as f64).sin(), (0.3 * k as f64).cos())).collect();
        for eps in [0.0, 0.4] {
            let dense = assemble_joint_hamiltonian(&m, eps).unwrap().mul_vec(&x);
            let free = JointHamiltonian::new(&m, eps).unwrap().apply(&x).unwrap();
            let diff: Vec<C64> = dense.iter().zip(&free).map(|(a, b)| a - b).collect();
            assert!(norm(&diff) < 1e-13);
        }
    }

    #[test]
    fn evolve_matches_dense_exponential() {
        let m = model();
        let x: Vec<C64> = (0..12).map(|k| c(1.0 / (k + 1) as f64, 0.1 * k as f64)).collect();
        let t = 1.7;
        let u = expm_hermitian(&assemble_joint_hamiltonian(&m, 0.4).unwrap(), c(0.0, -t)).unwrap();
        let dense = u.mul_vec(&x);
        let free = JointHamiltonian::new(&m, 0.4).unwrap().evolve(&x, t).unwrap();
        let diff: Vec<C64> = dense.iter().zip(&free).map(|(a, b)| a - b).collect();
        assert!(norm(&diff) < 1e-12 * norm(&x));
        let hs = m.h_s().to_dense().unwrap();
        let psi = [c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.5, 0.0)];
        let want = expm_hermitian(&hs, c(0.0, -t)).unwrap().mul_vec(&psi);
        let got = evolve_system(m.h_s(), &psi, t).unwrap();
        let diff: Vec<C64> = want.iter().zip(&got).map(|(a, b)| a - b).collect();
        assert!(norm(&diff) < 1e-13);
    }

    #[test]
    fn purity_of_product_and_entangled_vectors() {
        let s = 0.5f64.sqrt();
        // |0⟩⊗|+⟩ is a product state; (|00⟩+|11⟩)/√2 is maximally entangled
        assert!((reduced_purity(&[c(s, 0.0), c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0)], 2) - 1.0).abs() < 1e-15);
        assert!((reduced_purity(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)], 2) - 0.5).abs() < 1e-15);
    }
}
