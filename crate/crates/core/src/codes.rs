//! Built-in decoherence-free encodings, encoded GHZ states and a numerical
//! DFS membership test.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{inner, norm, StateVector};
use crate::operators::ModelSpec;
use crate::propagate::{evolve_system, JointHamiltonian};

/// Default membership tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DfsCode {
    pub name: String,
    pub n_physical: usize,
    pub logical_zero: StateVector,
    pub logical_one: StateVector,
}

fn real_state(amps: &[f64]) -> StateVector {
    StateVector::new(amps.iter().map(|&a| C64::new(a, 0.0)).collect()).expect("nonzero literal state")
}

/// Two-qubit code `|0̄⟩ = |01⟩`, `|1̄⟩ = |10⟩`.
pub fn pair_code() -> DfsCode {
    DfsCode {
        name: "pair".into(),
        n_physical: 2,
        logical_zero: StateVector::basis(4, 0b01).unwrap(),
        logical_one: StateVector::basis(4, 0b10).unwrap(),
    }
}

/// Four-qubit total-spin-zero code built from two singlets and the
/// `J = 0` combination of two triplets.
pub fn singlet_triplet_code() -> DfsCode {
    let s = 0.5f64.sqrt();
    let singlet = real_state(&[0.0, s, -s, 0.0]);
    let t_up = real_state(&[1.0, 0.0, 0.0, 0.0]);
    let t_down = real_state(&[0.0, 0.0, 0.0, 1.0]);
    let t_zero = real_state(&[0.0, s, s, 0.0]);
    let combo: Vec<C64> = t_up
        .kron(&t_down)
        .amplitudes()
        .iter()
        .zip(t_down.kron(&t_up).amplitudes())
        .zip(t_zero.kron(&t_zero).amplitudes())
        .map(|((a, b), c)| a + b - c)
        .collect();
    DfsCode {
        name: "singlet-triplet".into(),
        n_physical: 4,
        logical_zero: singlet.kron(&singlet),
        logical_one: StateVector::new(combo).unwrap(),
    }
}

/// Looks up a code by its CLI name.
pub fn code_by_name(name: &str) -> Result<DfsCode> {
    match name {
        "pair" | "dephasing-pair" => Ok(pair_code()),
        "singlet-triplet" => Ok(singlet_triplet_code()),
        other => Err(Error::Config(format!(
            "unknown code '{other}' (expected 'pair' or 'singlet-triplet')"
        ))),
    }
}

/// Number of blocks of `code` that make up an `n`-qubit register.
pub fn blocks_for(code: &DfsCode, n: usize) -> Result<usize> {
    if n == 0 || !n.is_multiple_of(code.n_physical) {
        return Err(Error::Config(format!(
            "code '{}' needs a positive multiple of {} qubits, got {n}",
            code.name, code.n_physical
        )));
    }
    Ok(n / code.n_physical)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodedState {
    pub code: DfsCode,
    pub n_total: usize,
    pub vector: StateVector,
}

impl EncodedState {
    pub fn blocks(&self) -> usize {
        self.n_total / self.code.n_physical
    }

    pub fn into_state(self) -> StateVector {
        self.vector
    }
}

/// `(|0̄⟩^{⊗b} + |1̄⟩^{⊗b})/√2` with blocks on consecutive qubits.
pub fn encoded_ghz(code: &DfsCode, blocks: usize) -> Result<EncodedState> {
    if blocks == 0 {
        return Err(Error::Config("encoded state needs at least one block".into()));
    }
    let power = |v: &StateVector| (1..blocks).fold(v.clone(), |acc, _| acc.kron(v));
    let zero = power(&code.logical_zero);
    let one = power(&code.logical_one);
    let sum = zero.amplitudes().iter().zip(one.amplitudes()).map(|(a, b)| a + b).collect();
    Ok(EncodedState {
        code: code.clone(),
        n_total: blocks * code.n_physical,
        vector: StateVector::new(sum)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipSample {
    pub t: f64,
    pub residual: f64,
    /// `|Σ_j |g_j|² − 1|`.
    pub norm_deviation: f64,
    #[serde(skip)]
    pub g: Vec<C64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub tol: f64,
    pub max_residual: f64,
    pub max_norm_deviation: f64,
    pub passed: bool,
    pub samples: Vec<MembershipSample>,
}

/// Checks `A_j|ψ_b⟩ = g_j e^{-itH_S}|ψ_b⟩` for every basis vector and Kraus
/// operator of `m` at ε = 0, with `g_j` taken from the first basis vector.
/// Evolution is matrix-free, so registers beyond the dense capacity work.
pub fn dfs_membership(
    basis: &[StateVector],
    m: &ModelSpec,
    t_samples: &[f64],
    tol: f64,
) -> Result<MembershipReport> {
    if basis.is_empty() {
        return Err(Error::Config("membership basis is empty".into()));
    }
    if let Some(b) = basis.iter().find(|b| b.dim() != m.system_dim()) {
        return Err(Error::Dimension(format!(
            "basis vector of dimension {} for a {}-dimensional register",
            b.dim(),
            m.system_dim()
        )));
    }
    let mut gram_dev = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            gram_dev = gram_dev.max((a.inner(b) - C64::new(want, 0.0)).norm());
        }
    }
    if gram_dev > ORTHONORMAL_TOL {
        return Err(Error::NonOrthonormal(gram_dev));
    }
    let h = JointHamiltonian::new(m, 0.0)?;
    let w = m.bath_basis();
    let dim_b = m.bath_dim();
    let samples = t_samples
        .par_iter()
        .map(|&t| {
            // images[b][j] = A_j|ψ_b⟩, from the evolved joint vector
            let mut images = Vec::with_capacity(basis.len());
            let mut free = Vec::with_capacity(basis.len());
            for b in basis {
                let out = h.evolve(b.kron(m.bath_initial()).amplitudes(), t)?;
                let per_j: Vec<Vec<C64>> = (0..dim_b)
                    .map(|j| {
                        out.chunks(dim_b)
                            .map(|row| row.iter().enumerate().map(|(k, z)| w[(k, j)].conj() * z).sum())
                            .collect()
                    })
                    .collect();
                images.push(per_j);
                free.push(evolve_system(m.h_s(), b.amplitudes(), t)?);
            }
            let mut g = Vec::with_capacity(dim_b);
            let mut residual = 0.0f64;
            for j in 0..dim_b {
                let gj = inner(&free[0], &images[0][j]);
                for (img, ub) in images.iter().zip(&free) {
                    let diff: Vec<C64> = img[j].iter().zip(ub).map(|(x, y)| x - gj * y).collect();
                    residual = residual.max(norm(&diff));
                }
                g.push(gj);
            }
            let norm_deviation = (g.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs();
            Ok(MembershipSample { t, residual, norm_deviation, g })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_residual = samples.iter().fold(0.0f64, |a, s| a.max(s.residual));
    let max_norm_deviation = samples.iter().fold(0.0f64, |a, s| a.max(s.norm_deviation));
    Ok(MembershipReport {
        tol,
        max_residual,
        max_norm_deviation,
        passed: max_residual <= tol && max_norm_deviation <= tol,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{boson_ops, BosonMode, CouplingOperator, Pauli, SystemOperator};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn pair_code_layout() {
        let code = pair_code();
        assert_eq!(code.logical_zero.inner(&code.logical_one), c(0.0));
        assert_eq!(code.logical_zero.amplitudes()[1], c(1.0));
        let sz = SystemOperator::collective(2, Pauli::Z).unwrap();
        for v in [&code.logical_zero, &code.logical_one] {
            assert!(norm(&sz.apply_state(v).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn singlet_triplet_is_spin_zero() {
        let code = singlet_triplet_code();
        assert!(code.logical_zero.inner(&code.logical_one).norm() < 1e-15);
        let ops = [
            SystemOperator::collective(4, Pauli::Z).unwrap(),
            SystemOperator::collective_plus(4).unwrap(),
            SystemOperator::collective_minus(4).unwrap(),
        ];
        for op in &ops {
            for v in [&code.logical_zero, &code.logical_one] {
                assert!(norm(&op.apply_state(v).unwrap()) < 1e-12);
            }
        }
        let nz: Vec<f64> = code
            .logical_zero
            .amplitudes()
            .iter()
            .map(|a| a.norm())
            .filter(|a| *a > 1e-15)
            .collect();
        assert_eq!(nz.len(), 4);
        assert!(nz.iter().all(|a| (a - 0.5).abs() < 1e-15));
    }

    #[test]
    fn ghz_states() {
        let s = 0.5f64.sqrt();
        let one = encoded_ghz(&pair_code(), 1).unwrap();
        assert!((one.vector.amplitudes()[0b01] - c(s)).norm() < 1e-15);
        assert!((one.vector.amplitudes()[0b10] - c(s)).norm() < 1e-15);
        let two = encoded_ghz(&pair_code(), 2).unwrap();
        assert_eq!(two.n_total, 4);
        let nz: Vec<usize> = (0..16).filter(|&k| two.vector.amplitudes()[k].norm() > 0.0).collect();
        assert_eq!(nz, vec![0b0101, 0b1010]);
        for code in [pair_code(), singlet_triplet_code()] {
            for b in 1..=3 {
                let st = encoded_ghz(&code, b).unwrap();
                assert!((norm(st.vector.amplitudes()) - 1.0).abs() < 1e-14);
            }
        }
        assert!(encoded_ghz(&pair_code(), 0).is_err());
    }

    #[test]
    fn names_and_divisibility() {
        assert_eq!(code_by_name("pair").unwrap().n_physical, 2);
        assert_eq!(code_by_name("singlet-triplet").unwrap().n_physical, 4);
        assert!(code_by_name("steane").is_err());
        assert_eq!(blocks_for(&singlet_triplet_code(), 8).unwrap(), 2);
        assert!(blocks_for(&singlet_triplet_code(), 6).is_err());
    }

    fn dephasing_model(cutoff: usize) -> ModelSpec {
        let mode = BosonMode::new("c", cutoff).unwrap();
        let (a, ad) = boson_ops(&mode).unwrap();
        let sz = SystemOperator::collective(2, Pauli::Z).unwrap();
        let hb = ad.matmul(&a);
        ModelSpec::new(
            SystemOperator::zero(2).unwrap(),
            hb,
            CouplingOperator::single(sz, &a + &ad).unwrap(),
            CouplingOperator::zero(2, cutoff),
            StateVector::basis(cutoff, 0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn membership_of_pair_subspace() {
        let m = dephasing_model(3);
        let code = pair_code();
        let ts = [0.0, 0.3, 0.7, 1.0];
        let good = dfs_membership(&[code.logical_zero.clone(), code.logical_one.clone()], &m, &ts, 1e-8)
            .unwrap();
        assert!(good.passed);
        assert!(good.max_residual <= 1e-10);
        assert!(good.max_norm_deviation <= 1e-9);
        let bad = dfs_membership(
            &[StateVector::basis(4, 0).unwrap(), StateVector::basis(4, 3).unwrap()],
            &m,
            &ts,
            1e-8,
        )
        .unwrap();
        assert!(!bad.passed);
    }

    #[test]
    fn membership_trivial_without_coupling() {
        let m = dephasing_model(3)
            .with_h_sb(CouplingOperator::zero(2, 3))
            .unwrap()
            .with_h_s(SystemOperator::collective(2, Pauli::X).unwrap())
            .unwrap();
        let basis: Vec<StateVector> = (0..4).map(|k| StateVector::basis(4, k).unwrap()).collect();
        assert!(dfs_membership(&basis, &m, &[0.5, 1.0], 1e-8).unwrap().passed);
    }

    #[test]
    fn membership_rejects_non_orthonormal() {
        let m = dephasing_model(2);
        let a = StateVector::basis(4, 1).unwrap();
        let b = StateVector::new(vec![c(0.0), c(1.0), c(1.0), c(0.0)]).unwrap();
        assert!(matches!(
            dfs_membership(&[a, b], &m, &[0.1], 1e-8),
            Err(Error::NonOrthonormal(_))
        ));
    }
}
