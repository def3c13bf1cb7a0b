//! Truncated bosonic modes.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix};

/// A single bosonic mode truncated to `cutoff` Fock levels `|0⟩ … |cutoff−1⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BosonMode {
    pub name: String,
    pub cutoff: usize,
}

impl BosonMode {
    pub fn new(name: impl Into<String>, cutoff: usize) -> Result<Self> {
        let mode = Self { name: name.into(), cutoff };
        mode.validate()?;
        Ok(mode)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff < 2 {
            return Err(Error::Config(format!(
                "mode '{}' has cutoff {}, need at least 2",
                self.name, self.cutoff
            )));
        }
        Ok(())
    }
}

/// Annihilation and creation matrices of a truncated mode.
pub fn boson_ops(mode: &BosonMode) -> Result<(ComplexMatrix, ComplexMatrix)> {
    mode.validate()?;
    let d = mode.cutoff;
    let a = ComplexMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let a_dag = a.adjoint();
    Ok((a, a_dag))
}

/// Ladder-operator factor of a bath monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ladder {
    #[serde(rename = "a")]
    Lower,
    #[serde(rename = "adag")]
    Raise,
}

/// Ordered product of several truncated modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BathSpace {
    modes: Vec<BosonMode>,
}

impl BathSpace {
    pub fn new(modes: Vec<BosonMode>) -> Result<Self> {
        for m in &modes {
            m.validate()?;
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].iter().any(|o| o.name == m.name) {
                return Err(Error::Config(format!("duplicate mode name '{}'", m.name)));
            }
        }
        Ok(Self { modes })
    }

    pub fn modes(&self) -> &[BosonMode] {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.modes.iter().map(|m| m.cutoff).product()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.name == name)
    }

    /// Lifts a single-mode operator to the full bath space.
    pub fn embed(&self, mode: usize, op: &ComplexMatrix) -> ComplexMatrix {
        let before: usize = self.modes[..mode].iter().map(|m| m.cutoff).product();
        let after: usize = self.modes[mode + 1..].iter().map(|m| m.cutoff).product();
        kron(&kron(&ComplexMatrix::identity(before), op), &ComplexMatrix::identity(after))
    }

    pub fn ladder(&self, mode: usize, which: Ladder) -> Result<ComplexMatrix> {
        let (a, a_dag) = boson_ops(&self.modes[mode])?;
        Ok(self.embed(mode, if which == Ladder::Lower { &a } else { &a_dag }))
    }

    /// Product Fock state with the given occupations (mode order).
    pub fn fock_index(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.modes.len() {
            return Err(Error::Dimension("one occupation per mode required".into()));
        }
        let mut idx = 0;
        for (m, &k) in self.modes.iter().zip(occupations) {
            if k >= m.cutoff {
                return Err(Error::Config(format!(
                    "occupation {k} exceeds cutoff {} of mode '{}'",
                    m.cutoff, m.name
                )));
            }
            idx = idx * m.cutoff + k;
        }
        Ok(idx)
    }
}
