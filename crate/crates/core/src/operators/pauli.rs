//! Bit-packed Pauli words.
//!
//! Qubit `q` (0-based) occupies bit `n - 1 - q` of a computational basis
//! index, so qubit 0 is the leftmost letter of a word and the leftmost
//! symbol of a ket: `|01⟩` has index 1. Each qubit carries two bits, one in
//! the X mask and one in the Z mask (`Y = X·Z` up to phase).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Default largest register for which dense matrices are materialized.
pub const DEFAULT_MAX_QUBITS: usize = 16;

/// Hard limit of the packed representation.
pub const MAX_PACKED_QUBITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// 2×2 matrix of the single-qubit operator.
    pub fn matrix(self) -> ComplexMatrix {
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let entries = match self {
            Pauli::I => [o, z, z, o],
            Pauli::X => [z, o, o, z],
            Pauli::Y => [z, -i, i, z],
            Pauli::Z => [o, z, z, -o],
        };
        ComplexMatrix::from_row_slice(2, 2, &entries).expect("2x2")
    }
}

/// An n-qubit Pauli word, stored as X and Z bit masks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: u8,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n: usize) -> Result<Self> {
        check_width(n)?;
        Ok(Self { n: n as u8, x: 0, z: 0 })
    }

    pub fn from_letters(letters: &[Pauli]) -> Result<Self> {
        let n = letters.len();
        let mut p = Self::identity(n)?;
        for (q, &l) in letters.iter().enumerate() {
            p.set(q, l);
        }
        Ok(p)
    }

    /// Word with the given letters on the listed qubits and `I` elsewhere.
    pub fn from_sparse(n: usize, letters: &[(usize, Pauli)]) -> Result<Self> {
        let mut p = Self::identity(n)?;
        for &(q, l) in letters {
            if q >= n {
                return Err(Error::Dimension(format!("qubit {q} outside {n}-qubit register")));
            }
            p.set(q, l);
        }
        Ok(p)
    }

    pub fn single(n: usize, qubit: usize, letter: Pauli) -> Result<Self> {
        Self::from_sparse(n, &[(qubit, letter)])
    }

    fn bit(&self, q: usize) -> u64 {
        1u64 << (self.n as usize - 1 - q)
    }

    fn set(&mut self, q: usize, l: Pauli) {
        let b = self.bit(q);
        let (x, z) = l.bits();
        self.x = if x { self.x | b } else { self.x & !b };
        self.z = if z { self.z | b } else { self.z & !b };
    }

    pub fn n_qubits(&self) -> usize {
        self.n as usize
    }

    pub fn letter(&self, q: usize) -> Pauli {
        let b = self.bit(q);
        Pauli::from_bits(self.x & b != 0, self.z & b != 0)
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n_qubits()).map(|q| self.letter(q)).collect()
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// Qubits (0-based) carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits())
            .filter(|&q| self.letter(q) != Pauli::I)
            .collect()
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Phase picked up by basis state `b`: `P|b⟩ = phase(b) |b ⊕ x⟩`.
    #[inline]
    pub fn phase_on(&self, b: u64) -> C64 {
        let ny = (self.x & self.z).count_ones();
        let sign = if (b & self.z).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        match ny % 4 {
            0 => C64::new(sign, 0.0),
            1 => C64::new(0.0, sign),
            2 => C64::new(-sign, 0.0),
            _ => C64::new(0.0, -sign),
        }
    }

    /// `out += coef · P · input` on a `2ⁿ` amplitude vector.
    pub fn accumulate(&self, coef: C64, input: &[C64], out: &mut [C64]) {
        debug_assert_eq!(input.len(), 1usize << self.n);
        debug_assert_eq!(out.len(), input.len());
        let ny = (self.x & self.z).count_ones();
        let base = coef * C64::new(0.0, 1.0).powu(ny % 4);
        for (b, &amp) in input.iter().enumerate() {
            if amp.re == 0.0 && amp.im == 0.0 {
                continue;
            }
            let b = b as u64;
            let v = if (b & self.z).count_ones().is_multiple_of(2) { base } else { -base };
            out[(b ^ self.x) as usize] += v * amp;
        }
    }

    /// Dense `2ⁿ×2ⁿ` matrix, built directly from the masks.
    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        self.to_dense_with_limit(DEFAULT_MAX_QUBITS)
    }

    pub fn to_dense_with_limit(&self, max_qubits: usize) -> Result<ComplexMatrix> {
        let n = self.n_qubits();
        if n > max_qubits {
            return Err(Error::Capacity {
                what: "dense Pauli word (qubits)",
                requested: n,
                limit: max_qubits,
            });
        }
        let dim = 1usize << n;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for b in 0..dim as u64 {
            m[((b ^ self.x) as usize, b as usize)] = self.phase_on(b);
        }
        Ok(m)
    }
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 || n > MAX_PACKED_QUBITS {
        return Err(Error::Capacity {
            what: "Pauli word width",
            requested: n,
            limit: MAX_PACKED_QUBITS,
        });
    }
    Ok(())
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits() {
            write!(f, "{}", self.letter(q).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses a letter string such as `"XIZY"`; the first letter is qubit 1.
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| {
                Pauli::from_symbol(c)
                    .ok_or_else(|| Error::Config(format!("invalid Pauli letter '{c}' in \"{s}\"")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_letters(&letters)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;
    use proptest::prelude::*;

    fn kron_chain(word: &PauliString) -> ComplexMatrix {
        word.letters()
            .iter()
            .map(|l| l.matrix())
            .reduce(|acc, m| kron(&acc, &m))
            .unwrap()
    }

    #[test]
    fn single_z_is_diag() {
        let z: PauliString = "Z".parse().unwrap();
        let want = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert_eq!(z.to_dense().unwrap(), want);
    }

    #[test]
    fn xx_is_antidiagonal() {
        let xx: PauliString = "XX".parse().unwrap();
        let d = xx.to_dense().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i + j == 3 { 1.0 } else { 0.0 };
                assert_eq!(d[(i, j)], C64::new(want, 0.0));
            }
        }
    }

    #[test]
    fn parse_roundtrip_and_weight() {
        let p: PauliString = "XIZY".parse().unwrap();
        assert_eq!(p.to_string(), "XIZY");
        assert_eq!(p.weight(), 3);
        assert_eq!(p.support(), vec![0, 2, 3]);
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn capacity_limit() {
        let p = PauliString::identity(5).unwrap();
        assert!(matches!(p.to_dense_with_limit(4), Err(Error::Capacity { .. })));
    }

    fn arb_word(max_n: usize) -> impl Strategy<Value = PauliString> {
        (1..=max_n)
            .prop_flat_map(|n| prop::collection::vec(0u8..4, n))
            .prop_map(|v| {
                let letters: Vec<Pauli> = v
                    .into_iter()
                    .map(|k| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][k as usize])
                    .collect();
                PauliString::from_letters(&letters).unwrap()
            })
    }

    proptest! {
        #[test]
        fn dense_matches_kron_chain(word in arb_word(4)) {
            let d = word.to_dense().unwrap();
            prop_assert!(d.max_abs_diff(&kron_chain(&word)) == 0.0);
        }

        #[test]
        fn dense_squares_to_identity(word in arb_word(6)) {
            let d = word.to_dense().unwrap();
            let dim = d.rows();
            prop_assert!(d.matmul(&d).max_abs_diff(&ComplexMatrix::identity(dim)) == 0.0);
            prop_assert!(d.hermiticity_residual() == 0.0);
        }
    }
}
