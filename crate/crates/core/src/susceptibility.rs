//! Analytic susceptibility `χ = Σ_αβ B_αβ S_αβ` from connected system
//! correlations and bath Gram matrices.
//!
//! Everything here works on state vectors: system operators are applied term
//! by term and no `2ⁿ×2ⁿ` matrix is formed.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::codes::EncodedState;
use crate::error::{Error, Result};
use crate::linalg::{inner, ComplexMatrix, StateVector};
use crate::operators::{CouplingOperator, SystemOperator};

/// `⟨ψ|O†O|ψ⟩ − |⟨ψ|O|ψ⟩|²`.
pub fn variance(psi: &StateVector, op: &SystemOperator) -> Result<f64> {
    let w = op.apply_state(psi)?;
    let mean = inner(psi.amplitudes(), &w);
    Ok(inner(&w, &w).re - mean.norm_sqr())
}

#[derive(Clone, Debug)]
pub struct CorrelationMatrices {
    /// Connected system correlations `S_αβ`.
    pub s: ComplexMatrix,
    /// Bath Gram matrix `B_αβ = ⟨φ₀|B_α†B_β|φ₀⟩`.
    pub b: ComplexMatrix,
}

impl CorrelationMatrices {
    pub fn term_count(&self) -> usize {
        self.s.rows()
    }

    /// `B_αβ S_αβ`, the contribution of one ordered term pair.
    pub fn contribution(&self, alpha: usize, beta: usize) -> C64 {
        self.b[(alpha, beta)] * self.s[(alpha, beta)]
    }

    /// `Σ_αβ B_αβ S_αβ = tr(B Sᵀ)`.
    pub fn chi(&self) -> f64 {
        let n = self.term_count();
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                acc += self.contribution(a, b);
            }
        }
        acc.re
    }
}

pub fn correlation_matrices(
    psi: &StateVector,
    v: &CouplingOperator,
    phi0: &StateVector,
) -> Result<CorrelationMatrices> {
    if psi.dim() != 1usize << v.n_qubits() {
        return Err(Error::Dimension(format!(
            "state of dimension {} for a {}-qubit perturbation",
            psi.dim(),
            v.n_qubits()
        )));
    }
    if phi0.dim() != v.bath_dim() {
        return Err(Error::Dimension(format!(
            "bath state of dimension {} for bath operators of dimension {}",
            phi0.dim(),
            v.bath_dim()
        )));
    }
    let terms = v.terms();
    let w: Vec<Vec<C64>> = terms
        .par_iter()
        .map(|t| t.system.apply_state(psi))
        .collect::<Result<_>>()?;
    let u: Vec<Vec<C64>> = terms.iter().map(|t| t.bath.mul_vec(phi0.amplitudes())).collect();
    let means: Vec<C64> = w.iter().map(|x| inner(psi.amplitudes(), x)).collect();
    let k = terms.len();
    let rows: Vec<Vec<C64>> = (0..k)
        .into_par_iter()
        .map(|a| (0..k).map(|b| inner(&w[a], &w[b]) - means[a].conj() * means[b]).collect())
        .collect();
    let s = ComplexMatrix::from_fn(k, k, |a, b| rows[a][b]);
    let b = ComplexMatrix::from_fn(k, k, |a, b| inner(&u[a], &u[b]));
    Ok(CorrelationMatrices { s, b })
}

/// Second-order fidelity coefficient magnitude `χ` for initial system state
/// `ψ`, perturbation `V` and initial bath state `φ₀`.
///
/// The value is only the susceptibility of the full dynamics when `ψ` lies in
/// a decoherence-free subspace of the unperturbed model (or `H_SB = 0`); this
/// is not checked here.
pub fn chi_analytic(psi: &StateVector, v: &CouplingOperator, phi0: &StateVector) -> Result<f64> {
    Ok(correlation_matrices(psi, v, phi0)?.chi())
}

/// Block-resolved decomposition of `χ`.
#[derive(Clone, Debug, Serialize)]
pub struct CrossTermProfile {
    pub blocks: usize,
    /// `table[a][b]`: summed real contributions of term pairs with the first
    /// term in block `a` and the second in block `b`.
    pub table: Vec<Vec<f64>>,
    pub intra: f64,
    pub inter: f64,
    pub straddling: f64,
    pub total: f64,
}

/// Splits `V` into single Pauli words and sorts every pair contribution into
/// intra-block, inter-block or straddling (a term not contained in one block).
pub fn cross_term_profile(
    psi: &EncodedState,
    v: &CouplingOperator,
    phi0: &StateVector,
) -> Result<CrossTermProfile> {
    let split = v.split_pauli_terms();
    let corr = correlation_matrices(&psi.vector, &split, phi0)?;
    let width = psi.code.n_physical;
    let blocks = psi.blocks();
    let owner: Vec<Option<usize>> = split
        .terms()
        .iter()
        .map(|t| {
            let support = t.system.terms()[0].1.support();
            let first = *support.first()? / width;
            support.iter().all(|q| q / width == first).then_some(first)
        })
        .collect();
    let mut table = vec![vec![0.0; blocks]; blocks];
    let (mut intra, mut inter, mut straddling) = (0.0, 0.0, 0.0);
    for (a, oa) in owner.iter().enumerate() {
        for (b, ob) in owner.iter().enumerate() {
            let c = corr.contribution(a, b).re;
            match (oa, ob) {
                (Some(x), Some(y)) => {
                    table[*x][*y] += c;
                    if x == y {
                        intra += c;
                    } else {
                        inter += c;
                    }
                }
                _ => straddling += c,
            }
        }
    }
    Ok(CrossTermProfile {
        blocks,
        table,
        intra,
        inter,
        straddling,
        total: corr.chi(),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Largest `|c nᵖ − χ| / χ` over the data.
    pub max_rel_residual: f64,
}

/// Least-squares fit of `log χ = p log n + log c`.
pub fn scaling_exponent(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::InvalidData(format!(
            "scaling fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    for w in points.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::InvalidData("n values must be strictly increasing".into()));
        }
    }
    if let Some(&(n, chi)) = points.iter().find(|&&(n, chi)| chi.is_nan() || chi <= 0.0 || n.is_nan() || n <= 0.0) {
        return Err(Error::InvalidData(format!(
            "scaling fit needs positive n and chi, got n={n}, chi={chi}"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let prefactor = (my - exponent * mx).exp();
    let max_rel_residual = points
        .iter()
        .map(|&(n, chi)| (prefactor * n.powf(exponent) - chi).abs() / chi)
        .fold(0.0, f64::max);
    Ok(ScalingFit { exponent, prefactor, max_rel_residual })
}
