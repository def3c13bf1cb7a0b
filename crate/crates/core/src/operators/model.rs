//! System–bath couplings and the full model `H(ε) = H_S⊗1 + 1⊗H_B + H_SB + εV`.

use num_complex::Complex64 as C64;

use super::system::SystemOperator;
use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, StateVector};

/// Default limit on the joint (system ⊗ bath) dimension for dense work.
pub const DEFAULT_CAPACITY: usize = 4096;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTerm {
    pub system: SystemOperator,
    pub bath: ComplexMatrix,
}

/// `Σ_α S_α ⊗ B_α`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingOperator {
    n_qubits: usize,
    bath_dim: usize,
    terms: Vec<CouplingTerm>,
}

impl CouplingOperator {
    pub fn new(n_qubits: usize, bath_dim: usize, terms: Vec<CouplingTerm>) -> Result<Self> {
        for (k, t) in terms.iter().enumerate() {
            if t.system.n_qubits() != n_qubits {
                return Err(Error::Dimension(format!(
                    "coupling term {k}: system operator on {} qubits, expected {n_qubits}",
                    t.system.n_qubits()
                )));
            }
            if t.bath.rows() != bath_dim || t.bath.cols() != bath_dim {
                return Err(Error::Dimension(format!(
                    "coupling term {k}: bath operator {}x{}, expected {bath_dim}x{bath_dim}",
                    t.bath.rows(),
                    t.bath.cols()
                )));
            }
        }
        Ok(Self { n_qubits, bath_dim, terms })
    }

    pub fn zero(n_qubits: usize, bath_dim: usize) -> Self {
        Self { n_qubits, bath_dim, terms: Vec::new() }
    }

    pub fn single(system: SystemOperator, bath: ComplexMatrix) -> Result<Self> {
        let n = system.n_qubits();
        let d = bath.rows();
        Self::new(n, d, vec![CouplingTerm { system, bath }])
    }

    pub fn terms(&self) -> &[CouplingTerm] {
        &self.terms
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn bath_dim(&self) -> usize {
        self.bath_dim
    }

    /// True when no term survives (all system or bath factors vanish).
    pub fn is_zero(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.system.is_zero() || t.bath.max_abs() == 0.0)
    }

    /// Maximum locality over the system factors.
    pub fn locality(&self) -> usize {
        self.terms.iter().map(|t| t.system.locality()).max().unwrap_or(0)
    }

    /// Dense `Σ_α S_α ⊗ B_α` on the joint space.
    pub fn dense(&self, capacity: usize) -> Result<ComplexMatrix> {
        let dim_s = 1usize << self.n_qubits;
        let joint = dim_s * self.bath_dim;
        if joint > capacity {
            return Err(Error::Capacity {
                what: "joint dimension",
                requested: joint,
                limit: capacity,
            });
        }
        let mut out = ComplexMatrix::zeros(joint, joint);
        for t in &self.terms {
            out += &kron(&t.system.to_dense_with_limit(self.n_qubits)?, &t.bath);
        }
        Ok(out)
    }

    /// Cheap sufficient condition: every term is a product of Hermitian
    /// factors.
    pub fn termwise_hermitian(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.system.is_hermitian(HERMITIAN_TOL) && t.bath.is_hermitian(HERMITIAN_TOL))
    }

    /// Hermiticity of the dense realization, skipping the dense check when
    /// every term is already Hermitian.
    pub fn check_hermitian(&self, capacity: usize, label: &str) -> Result<()> {
        if self.termwise_hermitian() {
            return Ok(());
        }
        let d = self.dense(capacity).map_err(|e| match e {
            Error::Capacity { .. } => Error::Config(format!(
                "{label}: terms are not individually Hermitian and the joint space is too large to verify the sum"
            )),
            other => other,
        })?;
        let res = d.hermiticity_residual();
        if res > HERMITIAN_TOL * d.max_abs().max(1.0) {
            return Err(Error::Config(format!("{label} is not Hermitian (residual {res:e})")));
        }
        Ok(())
    }

    /// One coupling term per Pauli word of each `S_α`, keeping `B_α`.
    pub fn split_pauli_terms(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .flat_map(|t| {
                t.system.split_terms().into_iter().map(move |s| CouplingTerm {
                    system: s,
                    bath: t.bath.clone(),
                })
            })
            .collect();
        Self { n_qubits: self.n_qubits, bath_dim: self.bath_dim, terms }
    }
}

/// Complete system–bath model.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    h_s: SystemOperator,
    h_b: ComplexMatrix,
    h_sb: CouplingOperator,
    v: CouplingOperator,
    bath_initial: StateVector,
    capacity: usize,
}

impl ModelSpec {
    pub fn new(
        h_s: SystemOperator,
        h_b: ComplexMatrix,
        h_sb: CouplingOperator,
        v: CouplingOperator,
        bath_initial: StateVector,
    ) -> Result<Self> {
        let n = h_s.n_qubits();
        let d_b = bath_initial.dim();
        if h_b.rows() != d_b || h_b.cols() != d_b {
            return Err(Error::Dimension(format!(
                "H_B is {}x{}, bath initial state has dimension {d_b}",
                h_b.rows(),
                h_b.cols()
            )));
        }
        for (label, c) in [("H_SB", &h_sb), ("V", &v)] {
            if c.n_qubits() != n || c.bath_dim() != d_b {
                return Err(Error::Dimension(format!(
                    "{label} acts on {} qubits ⊗ bath dim {}, model has {n} ⊗ {d_b}",
                    c.n_qubits(),
                    c.bath_dim()
                )));
            }
        }
        if !h_s.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::Config("H_S has complex coefficients".into()));
        }
        if !h_b.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::Config("H_B is not Hermitian".into()));
        }
        h_sb.check_hermitian(DEFAULT_CAPACITY, "H_SB")?;
        v.check_hermitian(DEFAULT_CAPACITY, "V")?;
        Ok(Self {
            h_s,
            h_b,
            h_sb,
            v,
            bath_initial,
            capacity: DEFAULT_CAPACITY,
        })
    }

    pub fn with_capacity(mut self, capacity: usize) -> Self {
        self.capacity = capacity;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.h_s.n_qubits()
    }

    pub fn system_dim(&self) -> usize {
        1usize << self.n_qubits()
    }

    pub fn bath_dim(&self) -> usize {
        self.bath_initial.dim()
    }

    pub fn joint_dim(&self) -> usize {
        self.system_dim() * self.bath_dim()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn h_s(&self) -> &SystemOperator {
        &self.h_s
    }

    pub fn h_b(&self) -> &ComplexMatrix {
        &self.h_b
    }

    pub fn h_sb(&self) -> &CouplingOperator {
        &self.h_sb
    }

    pub fn v(&self) -> &CouplingOperator {
        &self.v
    }

    pub fn bath_initial(&self) -> &StateVector {
        &self.bath_initial
    }

    pub fn with_h_s(&self, h_s: SystemOperator) -> Result<Self> {
        Ok(Self::new(h_s, self.h_b.clone(), self.h_sb.clone(), self.v.clone(), self.bath_initial.clone())?
            .with_capacity(self.capacity))
    }

    pub fn with_h_sb(&self, h_sb: CouplingOperator) -> Result<Self> {
        Ok(Self::new(self.h_s.clone(), self.h_b.clone(), h_sb, self.v.clone(), self.bath_initial.clone())?
            .with_capacity(self.capacity))
    }

    pub fn with_v(&self, v: CouplingOperator) -> Result<Self> {
        Ok(Self::new(self.h_s.clone(), self.h_b.clone(), self.h_sb.clone(), v, self.bath_initial.clone())?
            .with_capacity(self.capacity))
    }

    /// Same model with `V = 0`.
    pub fn unperturbed(&self) -> Self {
        Self {
            v: CouplingOperator::zero(self.n_qubits(), self.bath_dim()),
            ..self.clone()
        }
    }

    pub fn check_capacity(&self) -> Result<()> {
        if self.joint_dim() > self.capacity {
            return Err(Error::Capacity {
                what: "joint dimension",
                requested: self.joint_dim(),
                limit: self.capacity,
            });
        }
        Ok(())
    }

    /// `H_S ⊗ 1 + 1 ⊗ H_B + H_SB`.
    pub fn h0_dense(&self) -> Result<ComplexMatrix> {
        self.check_capacity()?;
        let h_s = self.h_s.to_dense_with_limit(self.n_qubits())?;
        let mut h = kron(&h_s, &ComplexMatrix::identity(self.bath_dim()));
        h += &kron(&ComplexMatrix::identity(self.system_dim()), &self.h_b);
        h += &self.h_sb.dense(self.capacity)?;
        Ok(h)
    }

    pub fn v_dense(&self) -> Result<ComplexMatrix> {
        self.check_capacity()?;
        self.v.dense(self.capacity)
    }

    /// Orthonormal bath basis (columns) whose first element is the initial
    /// bath state, completed with computational basis vectors by
    /// Gram–Schmidt.
    pub fn bath_basis(&self) -> ComplexMatrix {
        let d = self.bath_dim();
        let mut cols: Vec<Vec<C64>> = vec![self.bath_initial.amplitudes().to_vec()];
        for k in 0..d {
            if cols.len() == d {
                break;
            }
            let mut v = vec![C64::new(0.0, 0.0); d];
            v[k] = C64::new(1.0, 0.0);
            for _ in 0..2 {
                for c in &cols {
                    let ov = crate::linalg::inner(c, &v);
                    v.iter_mut().zip(c).for_each(|(x, y)| *x -= ov * y);
                }
            }
            let nrm = crate::linalg::norm(&v);
            if nrm > 1e-8 {
                cols.push(v.into_iter().map(|z| z / nrm).collect());
            }
        }
        ComplexMatrix::from_fn(d, d, |i, j| cols[j][i])
    }
}

/// `H(ε) = H_S⊗1 + 1⊗H_B + H_SB + ε V`, system-major.
pub fn assemble_joint_hamiltonian(m: &ModelSpec, epsilon: f64) -> Result<ComplexMatrix> {
    let h0 = m.h0_dense()?;
    if epsilon == 0.0 {
        return Ok(h0);
    }
    Ok(&h0 + &m.v_dense()?.scale_real(epsilon))
}
