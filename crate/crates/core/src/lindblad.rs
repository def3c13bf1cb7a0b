//! Markovian master equations with perturbed Hamiltonian and jump operators.
//!
//! Density matrices are vectorized row by row, so that
//! `vec(AρB) = (A ⊗ Bᵀ) vec(ρ)`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelity::uhlmann_fidelity;
use crate::linalg::{expm_pade, kron, ComplexMatrix, DensityMatrix, JsonRows};

/// Largest Hilbert-space dimension accepted (superoperator 4096×4096).
pub const MAX_LINDBLAD_DIM: usize = 64;
/// ε used by [`lindblad_f1`].
pub const LINDBLAD_F1_STEP: f64 = 1e-4;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Jump {
    pub gamma: f64,
    pub l: ComplexMatrix,
    /// Perturbation direction `L'`.
    pub l_prime: ComplexMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LindbladModel {
    h: ComplexMatrix,
    v: ComplexMatrix,
    jumps: Vec<Jump>,
}

impl LindbladModel {
    pub fn new(h: ComplexMatrix, v: ComplexMatrix, jumps: Vec<Jump>) -> Result<Self> {
        let n = h.rows();
        let square = |m: &ComplexMatrix, what: &str| {
            if m.rows() != n || m.cols() != n {
                Err(Error::Dimension(format!("{what} is {}x{}, expected {n}x{n}", m.rows(), m.cols())))
            } else {
                Ok(())
            }
        };
        square(&h, "H")?;
        square(&v, "V")?;
        for (k, j) in jumps.iter().enumerate() {
            square(&j.l, &format!("L_{k}"))?;
            square(&j.l_prime, &format!("L'_{k}"))?;
            if !(j.gamma >= 0.0 && j.gamma.is_finite()) {
                return Err(Error::Config(format!("rate gamma_{k} = {} must be nonnegative", j.gamma)));
            }
        }
        if !h.is_hermitian(HERMITIAN_TOL) || !v.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::InvalidData("H and V must be Hermitian".into()));
        }
        Ok(Self { h, v, jumps })
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// Same dissipator and Hamiltonian with the perturbation removed.
    pub fn unperturbed(&self) -> Self {
        let n = self.dim();
        Self {
            h: self.h.clone(),
            v: ComplexMatrix::zeros(n, n),
            jumps: self
                .jumps
                .iter()
                .map(|j| Jump { gamma: j.gamma, l: j.l.clone(), l_prime: ComplexMatrix::zeros(n, n) })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(Self::from_json_with_state(text)?.0)
    }

    /// Parses a model file together with its optional `rho0` entry.
    pub fn from_json_with_state(text: &str) -> Result<(Self, Option<DensityMatrix>)> {
        let file: LindbladFile =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("Lindblad model JSON: {e}")))?;
        let model = file.build()?;
        let rho0 = match &file.rho0 {
            Some(rows) => {
                let rho = DensityMatrix::new(ComplexMatrix::from_json_rows(rows)?)
                    .map_err(|e| Error::Config(format!("rho0: {e}")))?;
                if rho.dim() != model.dim() {
                    return Err(Error::Config(format!("rho0 is {0}x{0}, model has dimension {1}", rho.dim(), model.dim())));
                }
                Some(rho)
            }
            None => None,
        };
        Ok((model, rho0))
    }

    pub fn to_json_pretty(&self) -> String {
        let file = LindbladFile {
            h: self.h.to_json_rows(),
            jumps: self
                .jumps
                .iter()
                .map(|j| JumpFile { gamma: j.gamma, l: j.l.to_json_rows() })
                .collect(),
            perturbation: Some(PerturbationFile {
                v: Some(self.v.to_json_rows()),
                jumps: self.jumps.iter().map(|j| Some(j.l_prime.to_json_rows())).collect(),
            }),
            rho0: None,
        };
        serde_json::to_string_pretty(&file).expect("plain data serializes")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JumpFile {
    gamma: f64,
    l: JsonRows,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PerturbationFile {
    #[serde(default)]
    v: Option<JsonRows>,
    /// One entry per jump; missing or null entries mean `L' = 0`.
    #[serde(default)]
    jumps: Vec<Option<JsonRows>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LindbladFile {
    h: JsonRows,
    #[serde(default)]
    jumps: Vec<JumpFile>,
    #[serde(default)]
    perturbation: Option<PerturbationFile>,
    /// Optional initial density matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho0: Option<JsonRows>,
}

impl LindbladFile {
    fn build(&self) -> Result<LindbladModel> {
        let h = ComplexMatrix::from_json_rows(&self.h)?;
        let n = h.rows();
        let zero = || ComplexMatrix::zeros(n, n);
        let (v, primes) = match &self.perturbation {
            Some(p) => (
                p.v.as_ref().map(ComplexMatrix::from_json_rows).transpose()?.unwrap_or_else(zero),
                p.jumps.as_slice(),
            ),
            None => (zero(), &[][..]),
        };
        if primes.len() > self.jumps.len() {
            return Err(Error::Config(format!(
                "{} perturbed jump operators for {} jumps",
                primes.len(),
                self.jumps.len()
            )));
        }
        let jumps = self
            .jumps
            .iter()
            .enumerate()
            .map(|(k, j)| {
                let l_prime = match primes.get(k) {
                    Some(Some(rows)) => ComplexMatrix::from_json_rows(rows)?,
                    _ => zero(),
                };
                Ok(Jump { gamma: j.gamma, l: ComplexMatrix::from_json_rows(&j.l)?, l_prime })
            })
            .collect::<Result<_>>()?;
        LindbladModel::new(h, v, jumps)
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n > MAX_LINDBLAD_DIM {
        return Err(Error::Capacity { what: "Lindblad Hilbert-space dimension", requested: n, limit: MAX_LINDBLAD_DIM });
    }
    Ok(())
}

/// The `N²×N²` generator at perturbation strength ε.
pub fn liouvillian_matrix(m: &LindbladModel, epsilon: f64) -> Result<ComplexMatrix> {
    let n = m.dim();
    check_dim(n)?;
    let id = ComplexMatrix::identity(n);
    let h = &m.h + &m.v.scale_real(epsilon);
    let mut out = (&kron(&h, &id) - &kron(&id, &h.transpose())).scale(C64::new(0.0, -1.0));
    for j in &m.jumps {
        let l = &j.l + &j.l_prime.scale_real(epsilon);
        let ll = l.adjoint().matmul(&l);
        let term = &(&kron(&l, &l.conj()) - &kron(&ll, &id).scale_real(0.5)) - &kron(&id, &ll.transpose()).scale_real(0.5);
        out += &term.scale_real(j.gamma);
    }
    Ok(out)
}

pub fn vectorize(rho: &ComplexMatrix) -> Vec<C64> {
    (0..rho.rows()).flat_map(|r| (0..rho.cols()).map(move |c| rho[(r, c)])).collect()
}

pub fn unvectorize(v: &[C64], n: usize) -> Result<ComplexMatrix> {
    if v.len() != n * n {
        return Err(Error::Dimension(format!("vector of length {} is not {n}x{n}", v.len())));
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| v[r * n + c]))
}

/// `e^{tL(ε)} ρ₀`.
pub fn evolve(m: &LindbladModel, epsilon: f64, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    let n = m.dim();
    if rho0.dim() != n {
        return Err(Error::Dimension(format!("{}-dimensional state for a {n}-level model", rho0.dim())));
    }
    let prop = expm_pade(&liouvillian_matrix(m, epsilon)?.scale_real(t))?;
    let out = unvectorize(&prop.mul_vec(&vectorize(rho0.matrix())), n)?;
    Ok(DensityMatrix::from_matrix_unchecked(out.hermitian_part()))
}

/// Central-difference `dF/dε` at ε = 0 for `F[ρ(0,t), ρ(ε,t)]`.
pub fn lindblad_f1(m: &LindbladModel, rho0: &DensityMatrix, t: f64) -> Result<f64> {
    let h = LINDBLAD_F1_STEP;
    let states: Vec<DensityMatrix> = [0.0, h, -h]
        .par_iter()
        .map(|&e| evolve(m, e, rho0, t))
        .collect::<Result<_>>()?;
    let plus = uhlmann_fidelity(&states[0], &states[1])?;
    let minus = uhlmann_fidelity(&states[0], &states[2])?;
    Ok((plus - minus) / (2.0 * h))
}
