//! Exact desk-scale solvers: eigenpairs, time evolution, and RDM measurement.

pub mod evolve;
pub mod lanczos;
pub mod rdm;

pub use evolve::{evolve_exact, evolve_exact_with, evolve_trotter, KrylovOptions, TrotterOrder};
pub use lanczos::{ground_states, ground_states_with, EigenOptions, SpectralResult, DEFAULT_EIGEN_TOL, LANCZOS_SEED};
pub use rdm::{measure_rdm1, measure_rdm2, Rdm2};
