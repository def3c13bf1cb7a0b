//! Seeded random instances for the invariant suites.
//!
//! All generators draw from `ChaCha8Rng` (the ChaCha stream cipher with 8
//! rounds, `rand_chacha`), seeded with `seed_from_u64(seed)` and switched to
//! stream `index` via `set_stream`, so instance `index` does not depend on how
//! many other instances were drawn. Real scalars are standard normal samples
//! (`rand_distr::StandardNormal`), uniform ranges use `Rng::random_range`.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{ComplexMatrix, DensityMatrix, StateVector};
use crate::lindblad::{Jump, LindbladModel};
use crate::operators::{CouplingOperator, CouplingTerm, Pauli, PauliString, SystemOperator};

pub const DEFAULT_SEED: u64 = 20240917;

/// Stream offset separating Lindblad instances from Hamiltonian ones.
const LINDBLAD_STREAM: u64 = 1 << 32;

pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(normal(rng), normal(rng))
}

/// Haar-distributed pure state.
pub fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> StateVector {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
        if let Ok(s) = StateVector::new(v) {
            return s;
        }
    }
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    random_matrix(rng, dim, dim).hermitian_part()
}

/// Random unitary from Gram–Schmidt on Gaussian vectors; columns are
/// orthonormal and the first column is `first` when given.
pub fn random_basis(rng: &mut ChaCha8Rng, dim: usize, first: Option<&StateVector>) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    if let Some(f) = first {
        cols.push(f.amplitudes().to_vec());
    }
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
        for _ in 0..2 {
            for c in &cols {
                let p = crate::linalg::inner(c, &v);
                v.iter_mut().zip(c).for_each(|(x, y)| *x -= p * y);
            }
        }
        let n = crate::linalg::norm(&v);
        if n > 1e-6 {
            cols.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Hermitian register operator with `terms` random non-identity words and
/// normal coefficients.
pub fn random_system_operator(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> Result<SystemOperator> {
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let mut out = Vec::with_capacity(terms);
    while out.len() < terms {
        let word: Vec<Pauli> = (0..n).map(|_| letters[rng.random_range(0..4)]).collect();
        if word.iter().all(|&l| l == Pauli::I) {
            continue;
        }
        out.push((C64::new(normal(rng), 0.0), PauliString::from_letters(&word)?));
    }
    SystemOperator::new(n, out)
}

fn random_coupling(rng: &mut ChaCha8Rng, n: usize, dim_b: usize) -> Result<CouplingOperator> {
    let count = rng.random_range(1..=2);
    let terms = (0..count)
        .map(|_| {
            Ok(CouplingTerm {
                system: random_system_operator(rng, n, 2)?,
                bath: random_hermitian(rng, dim_b),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CouplingOperator::new(n, dim_b, terms)
}

/// Random model with its initial register state.
#[derive(Clone, Debug)]
pub struct RandomModel {
    pub index: u64,
    pub spec: crate::operators::ModelSpec,
    pub psi0: StateVector,
}

/// Random system–bath model: 1 to 3 qubits, bath dimension 2 to 4, nonzero
/// `H_S`, generic `H_B`, `H_SB`, `V` and bath state, and a Haar-random
/// register state (outside any decoherence-free subspace with probability 1).
pub fn random_model(seed: u64, index: u64) -> Result<RandomModel> {
    let mut rng = rng_for(seed, index);
    let n = rng.random_range(1..=3);
    let dim_b = rng.random_range(2..=4);
    let h_s = random_system_operator(&mut rng, n, 3)?;
    let h_b = random_hermitian(&mut rng, dim_b);
    let h_sb = random_coupling(&mut rng, n, dim_b)?;
    let v = random_coupling(&mut rng, n, dim_b)?;
    let phi0 = random_state(&mut rng, dim_b);
    let psi0 = random_state(&mut rng, 1 << n);
    let spec = crate::operators::ModelSpec::new(h_s, h_b, h_sb, v, phi0)?;
    Ok(RandomModel { index, spec, psi0 })
}

/// Random density matrix of the given rank (`X X†/tr` with Gaussian `X`).
pub fn random_density(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> Result<DensityMatrix> {
    let x = random_matrix(rng, dim, rank);
    let m = x.matmul(&x.adjoint());
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr).hermitian_part())
}

#[derive(Clone, Debug)]
pub struct RandomLindblad {
    pub index: u64,
    pub model: LindbladModel,
    pub rho0: DensityMatrix,
    pub rank: usize,
}

/// Random Lindblad model of dimension 2 or 3 with one or two jumps (rates in
/// `[0.1, 1)`, random perturbation directions). The initial state rank cycles
/// with `index` through `1..=dim`, so both pure and mixed states occur.
pub fn random_lindblad(seed: u64, index: u64) -> Result<RandomLindblad> {
    let mut rng = rng_for(seed, LINDBLAD_STREAM + index);
    let dim = rng.random_range(2..=3);
    let h = random_hermitian(&mut rng, dim);
    let v = random_hermitian(&mut rng, dim);
    let count = rng.random_range(1..=2);
    let jumps = (0..count)
        .map(|_| Jump {
            gamma: rng.random_range(0.1..1.0),
            l: random_matrix(&mut rng, dim, dim),
            l_prime: random_matrix(&mut rng, dim, dim),
        })
        .collect();
    let model = LindbladModel::new(h, v, jumps)?;
    let rank = 1 + (index as usize) % dim;
    let rho0 = random_density(&mut rng, dim, rank)?;
    Ok(RandomLindblad { index, model, rho0, rank })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::inner;

    #[test]
    fn models_are_reproducible_and_in_range() {
        for i in 0..20 {
            let a = random_model(7, i).unwrap();
            let b = random_model(7, i).unwrap();
            assert_eq!(a.psi0, b.psi0);
            assert!((1..=3).contains(&a.spec.n_qubits()));
            assert!((2..=4).contains(&a.spec.bath_dim()));
            assert!(!a.spec.h_s().is_zero());
            assert!(!a.spec.v().is_zero());
        }
        assert_ne!(random_model(7, 0).unwrap().psi0, random_model(8, 0).unwrap().psi0);
    }

    #[test]
    fn basis_is_unitary_with_given_first_column() {
        let mut rng = rng_for(1, 0);
        let f = random_state(&mut rng, 4);
        let u = random_basis(&mut rng, 4, Some(&f));
        assert!(u.adjoint().matmul(&u).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
        assert!((inner(&u.column(0), f.amplitudes()).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lindblad_ranks_cycle() {
        let ranks: Vec<usize> = (0..10).map(|i| random_lindblad(3, i).unwrap().rank).collect();
        assert!(ranks.contains(&1) && ranks.iter().any(|&r| r > 1));
        for i in 0..10 {
            let r = random_lindblad(3, i).unwrap();
            assert!((r.rho0.matrix().trace().re - 1.0).abs() < 1e-12);
        }
    }
}
