//! Dynamical fidelity susceptibility of decoherence-free subspaces.
//!
//! The analytic route evaluates `χ = Σ_αβ B_αβ S_αβ` from system and bath
//! correlation matrices; the brute-force route evolves the full system–bath
//! model and extracts the ε² coefficient of the fidelity.

pub mod channel;
pub mod codes;
pub mod error;
pub mod examples;
pub mod fidelity;
pub mod linalg;
pub mod lindblad;
pub mod operators;
pub mod propagate;
pub mod quadrature;
pub mod random;
pub mod susceptibility;
pub mod verify;

pub use error::{Error, Result};
