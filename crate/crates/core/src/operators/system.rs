//! Weighted sums of Pauli words acting on the register.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::pauli::{Pauli, PauliString, DEFAULT_MAX_QUBITS};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector};

/// Amplitude count above which operator application is split across threads.
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// `Σ c_w P_w` with duplicate words merged and exact zeros dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemOperator {
    n: usize,
    terms: Vec<(C64, PauliString)>,
}

impl SystemOperator {
    pub fn new(n: usize, terms: impl IntoIterator<Item = (C64, PauliString)>) -> Result<Self> {
        PauliString::identity(n)?;
        let mut merged: BTreeMap<PauliString, C64> = BTreeMap::new();
        for (c, w) in terms {
            if w.n_qubits() != n {
                return Err(Error::Dimension(format!(
                    "word {w} has {} qubits, operator has {n}",
                    w.n_qubits()
                )));
            }
            *merged.entry(w).or_default() += c;
        }
        Ok(Self {
            n,
            terms: merged
                .into_iter()
                .filter(|(_, c)| *c != C64::new(0.0, 0.0))
                .map(|(w, c)| (c, w))
                .collect(),
        })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, [(C64::new(1.0, 0.0), PauliString::identity(n)?)])
    }

    pub fn from_word(coef: C64, word: PauliString) -> Self {
        Self::new(word.n_qubits(), [(coef, word)]).expect("word width already validated")
    }

    /// `Σ_i σ^letter_i` over all qubits.
    pub fn collective(n: usize, letter: Pauli) -> Result<Self> {
        Self::weighted_sum(n, letter, |_| 1.0)
    }

    /// `Σ_i w(i) σ^letter_i`, where `i` is the 1-based qubit label.
    pub fn weighted_sum(n: usize, letter: Pauli, weight: impl Fn(usize) -> f64) -> Result<Self> {
        let terms = (0..n)
            .map(|q| Ok((C64::new(weight(q + 1), 0.0), PauliString::single(n, q, letter)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, terms)
    }

    /// Staggered magnetization `Σ_{i=1}^{n} (-1)^i σ^z_i` (1-based labels,
    /// so qubit 1 carries sign −1).
    pub fn staggered_z(n: usize) -> Result<Self> {
        Self::weighted_sum(n, Pauli::Z, |i| if i % 2 == 0 { 1.0 } else { -1.0 })
    }

    /// Collective raising operator `S⁺ = Σ_i (σ^x_i + iσ^y_i)`.
    pub fn collective_plus(n: usize) -> Result<Self> {
        let x = Self::collective(n, Pauli::X)?;
        let y = Self::collective(n, Pauli::Y)?;
        Ok(x.add(&y.scale(C64::new(0.0, 1.0))))
    }

    /// Collective lowering operator `S⁻ = Σ_i (σ^x_i − iσ^y_i)`.
    pub fn collective_minus(n: usize) -> Result<Self> {
        Ok(Self::collective_plus(n)?.adjoint())
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn terms(&self) -> &[(C64, PauliString)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "register widths differ");
        Self::new(self.n, self.terms.iter().chain(&other.terms).copied()).expect("same width")
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.n, self.terms.iter().map(|&(c, w)| (c * s, w))).expect("same width")
    }

    /// Words are Hermitian, so the adjoint conjugates the coefficients.
    pub fn adjoint(&self) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|&(c, w)| (c.conj(), w)).collect(),
        }
    }

    /// Largest coefficient imaginary part relative to the largest modulus.
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        let scale = self.terms.iter().fold(0.0f64, |a, (c, _)| a.max(c.norm()));
        self.terms.iter().all(|(c, _)| c.im.abs() <= rel_tol * scale)
    }

    /// Maximum Pauli weight over the merged terms (0 for the zero operator).
    pub fn locality(&self) -> usize {
        self.terms.iter().map(|(_, w)| w.weight()).max().unwrap_or(0)
    }

    /// `O|ψ⟩` by per-term bit manipulation, `O(terms · 2ⁿ)`.
    pub fn apply(&self, psi: &[C64]) -> Result<Vec<C64>> {
        if psi.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "{}-qubit operator applied to vector of length {}",
                self.n,
                psi.len()
            )));
        }
        let dim = psi.len();
        if dim < PARALLEL_THRESHOLD || self.terms.len() < 2 {
            let mut out = vec![C64::new(0.0, 0.0); dim];
            for &(c, w) in &self.terms {
                w.accumulate(c, psi, &mut out);
            }
            return Ok(out);
        }
        Ok(self
            .terms
            .par_iter()
            .fold(
                || vec![C64::new(0.0, 0.0); dim],
                |mut acc, &(c, w)| {
                    w.accumulate(c, psi, &mut acc);
                    acc
                },
            )
            .reduce(
                || vec![C64::new(0.0, 0.0); dim],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            ))
    }

    pub fn apply_state(&self, psi: &StateVector) -> Result<Vec<C64>> {
        self.apply(psi.amplitudes())
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, psi: &[C64]) -> Result<C64> {
        Ok(crate::linalg::inner(psi, &self.apply(psi)?))
    }

    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        self.to_dense_with_limit(DEFAULT_MAX_QUBITS)
    }

    pub fn to_dense_with_limit(&self, max_qubits: usize) -> Result<ComplexMatrix> {
        if self.n > max_qubits {
            return Err(Error::Capacity {
                what: "dense system operator (qubits)",
                requested: self.n,
                limit: max_qubits,
            });
        }
        let dim = self.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for &(c, w) in &self.terms {
            let x = w.x_mask();
            for b in 0..dim as u64 {
                m[((b ^ x) as usize, b as usize)] += c * w.phase_on(b);
            }
        }
        Ok(m)
    }

    /// Splits the operator into one single-word operator per term.
    pub fn split_terms(&self) -> Vec<SystemOperator> {
        self.terms
            .iter()
            .map(|&(c, w)| SystemOperator { n: self.n, terms: vec![(c, w)] })
            .collect()
    }
}
