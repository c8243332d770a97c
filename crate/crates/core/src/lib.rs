//! Hamiltonian encodings and exact numerical kernels for catalysis workflows
//! aimed at quantum computers.
//!
//! The crate turns electronic-structure integrals and nuclear potential grids
//! into weighted Pauli operators, and runs the three application workflows at
//! desk scale: reaction-pathway energetics, Born-Oppenheimer molecular
//! dynamics with RDM forces, and grid wavepacket dynamics with flux-based
//! rates. Resource arithmetic for the full-size problems lives in
//! [`resources`].

pub mod error;
pub mod fermion;
pub mod kernels;
pub mod nqd;
pub mod nuclear;
pub mod pathway;
pub mod qmd;
pub mod resources;
pub mod pauli;
pub mod sparse;
pub mod state;
pub mod workflow;

pub use error::{Error, Result};
pub use pauli::{op_combine, pauli_multiply, Pauli, PauliOperator, PauliString, Phase};
pub use sparse::{LinearOperator, SparseMatrix};
pub use state::{op_expectation, Basis, StateVector};
