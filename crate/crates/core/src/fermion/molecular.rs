//! Second-quantized electronic Hamiltonians over spin orbitals.
//!
//! Operator convention:
//!
//! ```text
//! H = core + sum_pq h1[p][q] a+_p a_q + 1/2 sum_pqrs h2[p,q,r,s] a+_p a+_q a_r a_s
//! ```
//!
//! so `h2[p,q,r,s] = <pq|sr>` in physicist notation. Spatial orbital `i`
//! becomes spin orbitals `2i` (alpha) and `2i + 1` (beta).

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fcidump::IntegralFile;
use super::mapping::{Encoding, FermionEncoder};
use super::operator::{FermionOperator, Ladder};
use crate::error::{Error, Result};
use crate::kernels::lanczos::{ground_states_with, EigenOptions};
use crate::kernels::rdm::{measure_rdm1, measure_rdm2, Rdm2};
use crate::pauli::{PauliOperator, DEFAULT_DROP_THRESHOLD};
use crate::state::{Basis, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub struct MolecularHamiltonian {
    pub n_spin_orbitals: usize,
    pub core_energy: f64,
    pub h1: DMatrix<f64>,
    pub h2: BTreeMap<[usize; 4], f64>,
    pub n_electrons: usize,
    pub ms2: i64,
    /// Spatial-orbital energies, when the source provides them.
    pub orbital_energies: Option<Vec<f64>>,
}

impl MolecularHamiltonian {
    pub fn new(n_spin_orbitals: usize, core_energy: f64, n_electrons: usize) -> Self {
        MolecularHamiltonian {
            n_spin_orbitals,
            core_energy,
            h1: DMatrix::zeros(n_spin_orbitals, n_spin_orbitals),
            h2: BTreeMap::new(),
            n_electrons,
            ms2: 0,
            orbital_energies: None,
        }
    }

    /// Spin-orbital Hamiltonian from spatial integrals.
    pub fn from_integrals(f: &IntegralFile) -> Result<Self> {
        let n = 2 * f.norb;
        let deviation = (&f.one_body - f.one_body.transpose()).amax();
        if deviation > super::fcidump::HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let mut h = MolecularHamiltonian::new(n, f.core_energy, f.nelec);
        h.ms2 = f.ms2;
        h.orbital_energies = f.orbital_energies.clone();
        for i in 0..f.norb {
            for j in 0..f.norb {
                for s in 0..2 {
                    h.h1[(2 * i + s, 2 * j + s)] = f.one_body[(i, j)];
                }
            }
        }
        // (ij|kl) a+_{i s} a+_{k t} a_{l t} a_{j s}
        for (&[i, j, k, l], &v) in &f.two_body {
            if v == 0.0 {
                continue;
            }
            for s in 0..2 {
                for t in 0..2 {
                    let key = [2 * i + s, 2 * k + t, 2 * l + t, 2 * j + s];
                    if key[0] == key[1] || key[2] == key[3] {
                        continue;
                    }
                    *h.h2.entry(key).or_default() += v;
                }
            }
        }
        Ok(h)
    }

    /// Two-site Hubbard model at half filling: hopping `-t` between like
    /// spins, on-site repulsion `u`.
    pub fn hubbard_dimer(t: f64, u: f64) -> Self {
        let mut f = IntegralFile::new(2, 2, 0);
        f.set_one_body(0, 1, -t);
        f.set_two_body(0, 0, 0, 0, u);
        f.set_two_body(1, 1, 1, 1, u);
        Self::from_integrals(&f).expect("symmetric by construction")
    }

    pub fn hubbard_dimer_ground_energy(t: f64, u: f64) -> f64 {
        (u - (u * u + 16.0 * t * t).sqrt()) / 2.0
    }

    pub fn to_fermion_operator(&self) -> FermionOperator {
        let mut f = FermionOperator::zero();
        if self.core_energy != 0.0 {
            f.add(vec![], Complex64::new(self.core_energy, 0.0));
        }
        for p in 0..self.n_spin_orbitals {
            for q in 0..self.n_spin_orbitals {
                let v = self.h1[(p, q)];
                if v != 0.0 {
                    f.add(vec![Ladder::create(p), Ladder::annihilate(q)], Complex64::new(v, 0.0));
                }
            }
        }
        for (&[p, q, r, s], &v) in &self.h2 {
            if v != 0.0 {
                f.add(
                    vec![Ladder::create(p), Ladder::create(q), Ladder::annihilate(r), Ladder::annihilate(s)],
                    Complex64::new(0.5 * v, 0.0),
                );
            }
        }
        f
    }

    pub fn to_qubit_operator(&self, encoding: Encoding) -> Result<PauliOperator> {
        FermionEncoder::new(encoding, self.n_spin_orbitals).map(&self.to_fermion_operator(), DEFAULT_DROP_THRESHOLD)
    }

    /// `core + sum h1[p][q] rho1[q][p] + 1/2 sum h2[pqrs] rho2[q][p][r][s]`,
    /// with `rho2[q][p][r][s] = <a+_p a+_q a_r a_s>`.
    pub fn energy_from_rdms(&self, rdm1: &DMatrix<Complex64>, rdm2: &Rdm2) -> f64 {
        let mut e = self.core_energy;
        for p in 0..self.n_spin_orbitals {
            for q in 0..self.n_spin_orbitals {
                e += self.h1[(p, q)] * rdm1[(q, p)].re;
            }
        }
        for (&[p, q, r, s], &v) in &self.h2 {
            e += 0.5 * v * rdm2.get(q, p, r, s).re;
        }
        e
    }

    /// Number of spatial orbitals.
    pub fn n_orbitals(&self) -> usize {
        self.n_spin_orbitals / 2
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let h1_ok = (&self.h1 - self.h1.transpose()).amax() <= tol;
        let h2_ok = self.h2.iter().all(|(&[p, q, r, s], &v)| {
            let partner = self.h2.get(&[s, r, q, p]).copied().unwrap_or(0.0);
            (v - partner).abs() <= tol
        });
        h1_ok && h2_ok
    }
}

/// Orbitals kept in the correlated treatment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSpace {
    /// Spatial orbitals kept, ascending.
    pub active: Vec<usize>,
    /// Spatial orbitals frozen at double occupancy.
    pub frozen_occupied: Vec<usize>,
    pub n_active_electrons: usize,
    /// Energy of the frozen core, filled in by [`freeze_reduce`].
    pub frozen_core_shift: f64,
}

impl ActiveSpace {
    pub fn new(active: Vec<usize>, frozen_occupied: Vec<usize>, n_active_electrons: usize) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &i in active.iter().chain(&frozen_occupied) {
            if !seen.insert(i) {
                return Err(Error::invalid(format!("orbital {i} listed twice")));
            }
        }
        if n_active_electrons > 2 * active.len() {
            return Err(Error::invalid(format!(
                "{n_active_electrons} electrons do not fit in {} spatial orbitals",
                active.len()
            )));
        }
        let mut active = active;
        active.sort_unstable();
        let mut frozen_occupied = frozen_occupied;
        frozen_occupied.sort_unstable();
        Ok(ActiveSpace { active, frozen_occupied, n_active_electrons, frozen_core_shift: 0.0 })
    }

    pub fn n_spin_orbitals(&self) -> usize {
        2 * self.active.len()
    }

    fn validate_for(&self, norb: usize) -> Result<()> {
        if let Some(&bad) = self.active.iter().chain(&self.frozen_occupied).find(|&&i| i >= norb) {
            return Err(Error::IndexOutOfRange { index: bad, limit: norb });
        }
        Ok(())
    }
}

/// Orbitals with `|e_i - fermi| <= window`; orbitals below the window are frozen.
/// Orbitals at or below the Fermi energy count as doubly occupied.
pub fn select_active_space(orbital_energies: &[f64], fermi_energy: f64, window: f64) -> Result<ActiveSpace> {
    if !(window > 0.0) {
        return Err(Error::invalid("energy window must be positive"));
    }
    let mut active = Vec::new();
    let mut frozen = Vec::new();
    let mut electrons = 0;
    for (i, &e) in orbital_energies.iter().enumerate() {
        if (e - fermi_energy).abs() <= window {
            active.push(i);
            if e <= fermi_energy {
                electrons += 2;
            }
        } else if e < fermi_energy {
            frozen.push(i);
        }
    }
    if active.is_empty() {
        return Err(Error::invalid("energy window selects no orbitals"));
    }
    ActiveSpace::new(active, frozen, electrons)
}

/// Folds frozen doubly occupied orbitals into the core energy and an
/// effective one-body term, and drops orbitals outside the space.
pub fn freeze_reduce(h: &MolecularHamiltonian, space: &ActiveSpace) -> Result<(MolecularHamiltonian, ActiveSpace)> {
    space.validate_for(h.n_orbitals())?;
    let frozen_electrons = 2 * space.frozen_occupied.len();
    if frozen_electrons + space.n_active_electrons != h.n_electrons {
        return Err(Error::invalid(format!(
            "electron count mismatch: {} frozen + {} active != {}",
            frozen_electrons, space.n_active_electrons, h.n_electrons
        )));
    }
    let frozen: Vec<usize> = space.frozen_occupied.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
    let active: Vec<usize> = space.active.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
    let g = |k: [usize; 4]| h.h2.get(&k).copied().unwrap_or(0.0);

    let mut shift = 0.0;
    for &c in &frozen {
        shift += h.h1[(c, c)];
        for &d in &frozen {
            shift += 0.5 * (g([c, d, d, c]) - g([c, d, c, d]));
        }
    }

    let n = active.len();
    let mut reduced = MolecularHamiltonian::new(n, h.core_energy + shift, space.n_active_electrons);
    reduced.ms2 = h.ms2;
    reduced.orbital_energies = h
        .orbital_energies
        .as_ref()
        .map(|e| space.active.iter().map(|&i| e[i]).collect());
    for (u_new, &u) in active.iter().enumerate() {
        for (v_new, &v) in active.iter().enumerate() {
            let mut value = h.h1[(u, v)];
            for &c in &frozen {
                value += 0.5 * (g([c, u, v, c]) + g([u, c, c, v]) - g([c, u, c, v]) - g([u, c, v, c]));
            }
            reduced.h1[(u_new, v_new)] = value;
        }
    }
    let position: BTreeMap<usize, usize> = active.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    for (&[p, q, r, s], &v) in &h.h2 {
        if let (Some(&a), Some(&b), Some(&c), Some(&d)) =
            (position.get(&p), position.get(&q), position.get(&r), position.get(&s))
        {
            reduced.h2.insert([a, b, c, d], v);
        }
    }
    let mut space = space.clone();
    space.frozen_core_shift = shift;
    Ok((reduced, space))
}

/// Normalized superposition of occupation bitstrings (`'1'` at position `p`
/// means mode `p` is occupied), expressed in the basis of `encoding`.
pub fn prepare_reference_state(configurations: &[(f64, &str)], encoding: Encoding) -> Result<StateVector> {
    let n = configurations
        .first()
        .map(|(_, s)| s.len())
        .ok_or_else(|| Error::invalid("no configurations"))?;
    if n >= 32 {
        return Err(Error::CapExceeded {
            what: "reference state".into(),
            requested: format!("{n} modes"),
            cap: "31".into(),
        });
    }
    let encoder = FermionEncoder::new(encoding, n);
    let mut amps = vec![Complex64::default(); 1 << n];
    for (c, bits) in configurations {
        if bits.len() != n {
            return Err(Error::invalid("bitstrings differ in length"));
        }
        let mut occ = 0u64;
        for (p, ch) in bits.chars().enumerate() {
            match ch {
                '1' => occ |= 1 << p,
                '0' => {}
                _ => return Err(Error::invalid(format!("bad occupation character `{ch}`"))),
            }
        }
        amps[encoder.encode_occupation(occ) as usize] += Complex64::new(*c, 0.0);
    }
    let basis = match encoding {
        Encoding::JordanWigner => Basis::Determinant { n_modes: n },
        _ => Basis::Qubit { n_qubits: n },
    };
    StateVector::new(basis, amps)
}

/// Ground state of `h` in its `n_electrons` sector.
#[derive(Debug, Clone)]
pub struct SectorGroundState {
    pub energy: f64,
    pub residual: f64,
    pub degeneracy: usize,
    /// Full determinant-basis vector (Jordan-Wigner ordering).
    pub state: StateVector,
    pub iterations: usize,
}

/// Lanczos ground state restricted to a particle-number sector.
pub fn sector_ground_state(
    h: &MolecularHamiltonian,
    n_electrons: usize,
    opts: &EigenOptions,
    warm_start: Option<&StateVector>,
) -> Result<SectorGroundState> {
    sector_ground_state_encoded(h, n_electrons, Encoding::JordanWigner, opts, warm_start)
}

/// As [`sector_ground_state`] but solving the operator produced by `encoding`.
/// The returned state is always converted back to the determinant basis.
pub fn sector_ground_state_encoded(
    h: &MolecularHamiltonian,
    n_electrons: usize,
    encoding: Encoding,
    opts: &EigenOptions,
    warm_start: Option<&StateVector>,
) -> Result<SectorGroundState> {
    let n = h.n_spin_orbitals;
    let cap = crate::pauli::max_matrix_qubits();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "sector eigensolve".into(),
            requested: format!("{n} spin orbitals"),
            cap: cap.to_string(),
        });
    }
    if n_electrons > n {
        return Err(Error::invalid(format!("{n_electrons} electrons exceed {n} spin orbitals")));
    }
    let encoder = FermionEncoder::new(encoding, n);
    let qubit_h = encoder.map(&h.to_fermion_operator(), DEFAULT_DROP_THRESHOLD)?;
    let occupations: Vec<u64> = (0..1u64 << n).filter(|b| b.count_ones() as usize == n_electrons).collect();
    let basis: Vec<u64> = occupations.iter().map(|&b| encoder.encode_occupation(b)).collect();
    let matrix = qubit_h.restricted_sparse(&basis)?;
    let start: Option<Vec<Complex64>> = warm_start.map(|s| occupations.iter().map(|&b| s.amplitudes()[b as usize]).collect());
    let res = ground_states_with(&matrix, opts, start.as_deref())?;
    let mut amps = vec![Complex64::default(); 1 << n];
    for (&occ, a) in occupations.iter().zip(&res.eigenvectors[0]) {
        amps[occ as usize] = *a;
    }
    // Fix the global phase so the largest amplitude is real and positive.
    let (_, pivot) = amps
        .iter()
        .enumerate()
        .fold((0.0, Complex64::new(1.0, 0.0)), |(best, p), (_, a)| if a.norm() > best + 1e-12 { (a.norm(), *a) } else { (best, p) });
    let phase = pivot.conj() / pivot.norm();
    amps.iter_mut().for_each(|a| *a *= phase);
    Ok(SectorGroundState {
        energy: res.eigenvalues[0],
        residual: res.residuals[0],
        degeneracy: res.ground_degeneracy,
        state: StateVector::new(Basis::Determinant { n_modes: n }, amps)?,
        iterations: res.iterations,
    })
}

/// RDM pair of a determinant-basis state.
pub fn state_rdms(psi: &StateVector, n_modes: usize) -> Result<(DMatrix<Complex64>, Rdm2)> {
    Ok((measure_rdm1(psi, n_modes)?, measure_rdm2(psi, n_modes)?))
}
