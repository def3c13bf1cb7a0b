//! JSON model description.
//!
//! ```json
//! {
//!   "qubits": 2,
//!   "modes": [{"name": "collective", "cutoff": 4}, {"name": "stag", "cutoff": 4}],
//!   "bath_initial": {"stag": 0},
//!   "h_s": [{"coef": 0.5, "word": "XX"}],
//!   "h_b": [{"coef": 1.0, "ops": [{"mode": "stag", "op": "adag"}, {"mode": "stag", "op": "a"}]}],
//!   "h_sb": [{"system": [{"coef": 1.0, "word": "ZI"}, {"coef": 1.0, "word": "IZ"}],
//!             "bath": [{"coef": 1.0, "ops": [{"mode": "collective", "op": "a"}]},
//!                      {"coef": 1.0, "ops": [{"mode": "collective", "op": "adag"}]}]}],
//!   "v": [...],
//!   "state": {"code": "pair"}
//! }
//! ```
//!
//! Coefficients are either a real number or `[re, im]`. Pauli words list
//! qubit 1 first. Bath monomials multiply their factors left to right; an
//! empty factor list is the identity. Occupations missing from
//! `bath_initial` default to the vacuum. Modes that no coupling references
//! (directly or through an `h_b` term shared with a referenced mode) are
//! dropped when the model is built.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::boson::{BathSpace, BosonMode, Ladder};
use super::model::{CouplingOperator, CouplingTerm, ModelSpec};
use super::pauli::PauliString;
use super::system::SystemOperator;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coef {
    Real(f64),
    Complex([f64; 2]),
}

impl Coef {
    pub fn value(self) -> C64 {
        match self {
            Coef::Real(r) => C64::new(r, 0.0),
            Coef::Complex([re, im]) => C64::new(re, im),
        }
    }

    pub fn from_complex(z: C64) -> Self {
        if z.im == 0.0 {
            Coef::Real(z.re)
        } else {
            Coef::Complex([z.re, z.im])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coef: Coef,
    pub word: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderFactor {
    pub mode: String,
    pub op: Ladder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathTerm {
    pub coef: Coef,
    #[serde(default)]
    pub ops: Vec<LadderFactor>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingDescription {
    pub system: Vec<PauliTerm>,
    pub bath: Vec<BathTerm>,
}

/// Initial register state: a built-in encoded GHZ state or explicit
/// amplitudes (`[re, im]` pairs, normalized on load).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateDescription {
    Code { code: String },
    Amplitudes { amplitudes: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDescription {
    pub qubits: usize,
    #[serde(default)]
    pub modes: Vec<BosonMode>,
    #[serde(default)]
    pub bath_initial: BTreeMap<String, usize>,
    #[serde(default)]
    pub h_s: Vec<PauliTerm>,
    #[serde(default)]
    pub h_b: Vec<BathTerm>,
    #[serde(default)]
    pub h_sb: Vec<CouplingDescription>,
    #[serde(default)]
    pub v: Vec<CouplingDescription>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateDescription>,
}

impl ModelDescription {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("model JSON: {e}")))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("model description serializes")
    }

    pub fn build(&self) -> Result<ModelSpec> {
        self.build_inner(true)
    }

    /// Builds the model with `V` removed, dropping modes only `V` referenced.
    pub fn build_unperturbed(&self) -> Result<ModelSpec> {
        self.build_inner(false)
    }

    fn build_inner(&self, with_v: bool) -> Result<ModelSpec> {
        if self.qubits == 0 {
            return Err(Error::Config("qubits must be positive".into()));
        }
        let all_modes = BathSpace::new(self.modes.clone())?;
        for name in self.bath_initial.keys() {
            if all_modes.index_of(name).is_none() {
                return Err(Error::Config(format!("bath_initial names unknown mode '{name}'")));
            }
        }
        let check_names = |terms: &[BathTerm]| -> Result<()> {
            for t in terms {
                for f in &t.ops {
                    if all_modes.index_of(&f.mode).is_none() {
                        return Err(Error::Config(format!("unknown mode '{}'", f.mode)));
                    }
                }
            }
            Ok(())
        };
        check_names(&self.h_b)?;
        for c in self.h_sb.iter().chain(&self.v) {
            check_names(&c.bath)?;
        }

        let couplings: Vec<&CouplingDescription> = if with_v {
            self.h_sb.iter().chain(&self.v).collect()
        } else {
            self.h_sb.iter().collect()
        };
        let mut kept: BTreeSet<&str> = couplings
            .iter()
            .flat_map(|c| c.bath.iter())
            .flat_map(|t| t.ops.iter().map(|f| f.mode.as_str()))
            .collect();
        loop {
            let before = kept.len();
            for t in &self.h_b {
                if t.ops.iter().any(|f| kept.contains(f.mode.as_str())) {
                    kept.extend(t.ops.iter().map(|f| f.mode.as_str()));
                }
            }
            if kept.len() == before {
                break;
            }
        }
        let space = BathSpace::new(
            self.modes
                .iter()
                .filter(|m| kept.contains(m.name.as_str()))
                .cloned()
                .collect(),
        )?;

        let bath_op = |terms: &[BathTerm]| -> Result<ComplexMatrix> {
            let d = space.dim();
            let mut out = ComplexMatrix::zeros(d, d);
            for t in terms {
                let mut prod = ComplexMatrix::identity(d);
                for f in &t.ops {
                    let idx = space.index_of(&f.mode).expect("mode kept");
                    prod = prod.matmul(&space.ladder(idx, f.op)?);
                }
                out += &prod.scale(t.coef.value());
            }
            Ok(out)
        };
        let system_op = |terms: &[PauliTerm]| -> Result<SystemOperator> {
            let parsed = terms
                .iter()
                .map(|t| {
                    if t.word.chars().count() != self.qubits {
                        return Err(Error::Config(format!(
                            "Pauli word \"{}\" has length {}, model has {} qubits",
                            t.word,
                            t.word.chars().count(),
                            self.qubits
                        )));
                    }
                    Ok((t.coef.value(), t.word.parse::<PauliString>()?))
                })
                .collect::<Result<Vec<_>>>()?;
            SystemOperator::new(self.qubits, parsed)
        };
        let coupling = |descs: &[CouplingDescription]| -> Result<CouplingOperator> {
            let terms = descs
                .iter()
                .map(|c| {
                    Ok(CouplingTerm {
                        system: system_op(&c.system)?,
                        bath: bath_op(&c.bath)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            CouplingOperator::new(self.qubits, space.dim(), terms)
        };

        let h_b_terms: Vec<BathTerm> = self
            .h_b
            .iter()
            .filter(|t| t.ops.iter().all(|f| kept.contains(f.mode.as_str())) && !t.ops.is_empty())
            .cloned()
            .collect();
        let occupations: Vec<usize> = space
            .modes()
            .iter()
            .map(|m| self.bath_initial.get(&m.name).copied().unwrap_or(0))
            .collect();
        let bath_initial = StateVector::basis(space.dim(), space.fock_index(&occupations)?)?;
        let v = if with_v {
            coupling(&self.v)?
        } else {
            CouplingOperator::zero(self.qubits, space.dim())
        };
        ModelSpec::new(
            system_op(&self.h_s)?,
            bath_op(&h_b_terms)?,
            coupling(&self.h_sb)?,
            v,
            bath_initial,
        )
    }

    /// Resolves the optional `state` entry.
    pub fn initial_state(&self) -> Result<Option<StateVector>> {
        self.state.as_ref().map(|s| s.resolve(self.qubits)).transpose()
    }
}

impl StateDescription {
    pub fn resolve(&self, qubits: usize) -> Result<StateVector> {
        match self {
            StateDescription::Code { code } => {
                let code = crate::codes::code_by_name(code)?;
                let blocks = crate::codes::blocks_for(&code, qubits)?;
                Ok(crate::codes::encoded_ghz(&code, blocks)?.into_state())
            }
            StateDescription::Amplitudes { amplitudes } => {
                if amplitudes.len() != 1usize << qubits {
                    return Err(Error::Config(format!(
                        "{} amplitudes supplied for {qubits} qubits",
                        amplitudes.len()
                    )));
                }
                StateVector::new(amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect())
            }
        }
    }
}
