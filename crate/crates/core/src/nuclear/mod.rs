//! Nuclear Hamiltonians on sinc-DVR grids and their qubit encodings.

pub mod dvr;
pub mod grid;
pub mod mapping;
pub mod vibrational;

pub use dvr::{build_dvr_hamiltonian, sinc_dvr_kinetic, DvrOperator};
pub use grid::{check_grid_size, describe_grid_count, max_grid_points, DvrAxis, DvrGrid, DvrSystem, DEFAULT_MAX_GRID_POINTS};
pub use mapping::{binary_map, binary_qubit_count, direct_map, direct_qubit_count, one_hot_basis, one_hot_matrix};
pub use vibrational::{build_vibrational_hamiltonian, harmonic_modes, HarmonicAnalysis, PotentialTerm, VibrationalHamiltonian};
