//! Operator construction: Pauli words, register operators, truncated boson
//! modes and system–bath models.

pub mod boson;
pub mod model;
pub mod model_file;
pub mod pauli;
pub mod system;

pub use boson::{boson_ops, BathSpace, BosonMode, Ladder};
pub use model::{assemble_joint_hamiltonian, CouplingOperator, CouplingTerm, ModelSpec, DEFAULT_CAPACITY};
pub use model_file::{
    BathTerm, Coef, CouplingDescription, LadderFactor, ModelDescription, PauliTerm, StateDescription,
};
pub use pauli::{Pauli, PauliString};
pub use system::SystemOperator;
