//! Fermionic operators, fermion-to-qubit encodings and molecular Hamiltonians.

pub mod fcidump;
pub mod mapping;
pub mod molecular;
pub mod operator;

pub use fcidump::{IntegralConvention, IntegralFile};
pub use mapping::{bravyi_kitaev, jordan_wigner, map_fermion_operator, parity_map, BinaryMatrix, Encoding, FermionEncoder, ModeSets};
pub use molecular::{
    freeze_reduce, prepare_reference_state, sector_ground_state, sector_ground_state_encoded, select_active_space, state_rdms,
    ActiveSpace, MolecularHamiltonian, SectorGroundState,
};
pub use operator::{FermionOperator, Ladder};
