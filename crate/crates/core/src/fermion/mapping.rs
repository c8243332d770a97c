//! Fermion-to-qubit encodings.
//!
//! Every encoding here is linear over GF(2): the qubit register holds
//! `q = B n (mod 2)` for an invertible binary matrix `B` acting on the
//! occupation vector `n`. Jordan-Wigner is `B = 1`, parity is the lower
//! triangle of ones, and Bravyi-Kitaev is the Fenwick-tree matrix where qubit
//! `k` stores the occupations `(k & (k + 1))..=k`.
//!
//! From `B` three index sets per mode `j` follow:
//! * flip set: qubits toggled when `n_j` changes (column `j` of `B`),
//! * occupation set: qubits whose parity is `n_j` (row `j` of `B^-1`),
//! * parity set: qubits whose parity is `n_0 + ... + n_(j-1)`.
//!
//! and `a+_j = X_flip * (1 + Z_occ)/2 * Z_parity`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{FermionOperator, Ladder};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliOperator, PauliString, DEFAULT_DROP_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    #[serde(alias = "jw")]
    JordanWigner,
    #[serde(alias = "bk")]
    BravyiKitaev,
    Parity,
}

impl Encoding {
    pub const ALL: [Encoding; 3] = [Encoding::JordanWigner, Encoding::BravyiKitaev, Encoding::Parity];

    pub fn short_name(self) -> &'static str {
        match self {
            Encoding::JordanWigner => "jw",
            Encoding::BravyiKitaev => "bk",
            Encoding::Parity => "parity",
        }
    }

    /// Encoding matrix `B` with `B[k][j] = 1` when qubit `k` depends on mode `j`.
    pub fn matrix(self, n_modes: usize) -> BinaryMatrix {
        let mut m = BinaryMatrix::zeros(n_modes);
        for k in 0..n_modes {
            for j in 0..n_modes {
                m.rows[k][j] = match self {
                    Encoding::JordanWigner => j == k,
                    Encoding::Parity => j <= k,
                    Encoding::BravyiKitaev => (k & (k + 1)) <= j && j <= k,
                };
            }
        }
        m
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Encoding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jw" | "jordan_wigner" | "jordan-wigner" => Ok(Encoding::JordanWigner),
            "bk" | "bravyi_kitaev" | "bravyi-kitaev" => Ok(Encoding::BravyiKitaev),
            "parity" => Ok(Encoding::Parity),
            other => Err(Error::invalid(format!("unknown fermion mapping `{other}`"))),
        }
    }
}

/// Square matrix over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: Vec<Vec<bool>>,
}

impl BinaryMatrix {
    pub fn zeros(n: usize) -> Self {
        BinaryMatrix { rows: vec![vec![false; n]; n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        (0..n).for_each(|i| m.rows[i][i] = true);
        m
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r][c]
    }

    /// Gauss-Jordan inverse over GF(2).
    pub fn inverse(&self) -> Option<BinaryMatrix> {
        let n = self.n();
        let mut a = self.rows.clone();
        let mut inv = Self::identity(n).rows;
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r][col])?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..n {
                if r != col && a[r][col] {
                    for c in 0..n {
                        a[r][c] ^= a[col][c];
                        inv[r][c] ^= inv[col][c];
                    }
                }
            }
        }
        Some(BinaryMatrix { rows: inv })
    }

    /// `B v (mod 2)` with `v` as a bitmask.
    pub fn apply(&self, v: u64) -> u64 {
        self.rows.iter().enumerate().fold(0u64, |acc, (k, row)| {
            let bit = row.iter().enumerate().filter(|&(j, &b)| b && v >> j & 1 == 1).count() % 2;
            acc | (bit as u64) << k
        })
    }
}

/// Per-mode index sets of an encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSets {
    pub flip: Vec<usize>,
    pub occupation: Vec<usize>,
    pub parity: Vec<usize>,
}

/// Ladder operators of an encoding, built once per register size.
#[derive(Debug, Clone)]
pub struct FermionEncoder {
    encoding: Encoding,
    n_modes: usize,
    matrix: BinaryMatrix,
    sets: Vec<ModeSets>,
    creators: Vec<PauliOperator>,
    annihilators: Vec<PauliOperator>,
}

impl FermionEncoder {
    pub fn new(encoding: Encoding, n_modes: usize) -> Self {
        let matrix = encoding.matrix(n_modes);
        let inverse = matrix.inverse().expect("encoding matrices are invertible");
        let mut sets = Vec::with_capacity(n_modes);
        let mut creators = Vec::with_capacity(n_modes);
        let mut annihilators = Vec::with_capacity(n_modes);
        for j in 0..n_modes {
            let flip: Vec<usize> = (0..n_modes).filter(|&k| matrix.get(k, j)).collect();
            let occupation: Vec<usize> = (0..n_modes).filter(|&m| inverse.get(j, m)).collect();
            let parity: Vec<usize> = (0..n_modes)
                .filter(|&m| (0..j).filter(|&k| inverse.get(k, m)).count() % 2 == 1)
                .collect();

            let string_of = |qubits: &[usize], p: Pauli| {
                let letters: Vec<(usize, Pauli)> = qubits.iter().map(|&q| (q, p)).collect();
                PauliString::from_letters(n_modes, &letters).expect("indices within register")
            };
            let x_flip = PauliOperator::from_string(string_of(&flip, Pauli::X), 1.0);
            let z_parity = PauliOperator::from_string(string_of(&parity, Pauli::Z), 1.0);
            let mut empty_projector = PauliOperator::identity(n_modes, 0.5);
            empty_projector
                .add_term(string_of(&occupation, Pauli::Z), Complex64::new(0.5, 0.0))
                .expect("same register");
            let creator = x_flip
                .multiply(&empty_projector)
                .and_then(|op| op.multiply(&z_parity))
                .expect("same register");
            annihilators.push(creator.adjoint());
            creators.push(creator);
            sets.push(ModeSets { flip, occupation, parity });
        }
        FermionEncoder { encoding, n_modes, matrix, sets, creators, annihilators }
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn mode_sets(&self, j: usize) -> &ModeSets {
        &self.sets[j]
    }

    pub fn ladder(&self, l: Ladder) -> Result<&PauliOperator> {
        if l.mode >= self.n_modes {
            return Err(Error::IndexOutOfRange { index: l.mode, limit: self.n_modes });
        }
        Ok(if l.dagger { &self.creators[l.mode] } else { &self.annihilators[l.mode] })
    }

    /// Qubit basis index of an occupation bitmask.
    pub fn encode_occupation(&self, occupation: u64) -> u64 {
        self.matrix.apply(occupation)
    }

    /// Maps a fermion operator term by term, dropping terms below `threshold`.
    pub fn map(&self, f: &FermionOperator, threshold: f64) -> Result<PauliOperator> {
        let mut out = PauliOperator::zero(self.n_modes);
        for (ops, c) in f.iter() {
            let mut product = PauliOperator::identity(self.n_modes, *c);
            for &l in ops {
                product = product.multiply(self.ladder(l)?)?;
            }
            for (s, v) in product.iter() {
                out.add_term(s.clone(), *v)?;
            }
        }
        out.simplify(threshold);
        Ok(out)
    }

    /// Qubit basis states spanning the sector with `n_particles` fermions.
    pub fn sector_basis(&self, n_particles: usize) -> Vec<u64> {
        assert!(self.n_modes < 64);
        let mut basis: Vec<u64> = (0..1u64 << self.n_modes)
            .filter(|b| b.count_ones() as usize == n_particles)
            .map(|b| self.encode_occupation(b))
            .collect();
        basis.sort_unstable();
        basis
    }

    /// Mapped total number operator.
    pub fn number_operator(&self) -> Result<PauliOperator> {
        let mut f = FermionOperator::zero();
        for p in 0..self.n_modes {
            f.add_operator(&FermionOperator::number(p), Complex64::new(1.0, 0.0));
        }
        self.map(&f, DEFAULT_DROP_THRESHOLD)
    }
}

fn check_modes(f: &FermionOperator, n_modes: usize) -> Result<()> {
    let needed = f.n_modes();
    if needed > n_modes {
        return Err(Error::IndexOutOfRange { index: needed - 1, limit: n_modes });
    }
    Ok(())
}

pub fn map_fermion_operator(f: &FermionOperator, n_modes: usize, encoding: Encoding) -> Result<PauliOperator> {
    check_modes(f, n_modes)?;
    FermionEncoder::new(encoding, n_modes).map(f, DEFAULT_DROP_THRESHOLD)
}

pub fn jordan_wigner(f: &FermionOperator, n_modes: usize) -> Result<PauliOperator> {
    map_fermion_operator(f, n_modes, Encoding::JordanWigner)
}

pub fn bravyi_kitaev(f: &FermionOperator, n_modes: usize) -> Result<PauliOperator> {
    map_fermion_operator(f, n_modes, Encoding::BravyiKitaev)
}

pub fn parity_map(f: &FermionOperator, n_modes: usize) -> Result<PauliOperator> {
    map_fermion_operator(f, n_modes, Encoding::Parity)
}
