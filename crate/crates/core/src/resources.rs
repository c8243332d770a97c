//! Qubit counts, Pauli-term statistics, naive Trotter gate counts and
//! classical cost comparators.

use std::ops::Add;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliOperator, PauliString};

/// Bytes per stored amplitude assumed for DMRG memory (complex double).
pub const DEFAULT_BYTES_PER_AMPLITUDE: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum QubitKind {
    /// One qubit per spin orbital, two per spatial orbital.
    JordanWigner { orbitals: usize, electrons: usize },
    /// One-hot grid: `dims * points`.
    DvrDirect { dims: usize, points: usize },
    /// Binary grid index: `dims * log2 points`.
    DvrBinary { dims: usize, points: usize },
    /// Binary Fock index: `modes * log2 levels`.
    BosonBinary { modes: usize, levels: usize },
}

fn log2_exact(n: usize) -> Result<usize> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros() as usize)
}

fn positive(name: &str, v: usize) -> Result<usize> {
    if v == 0 {
        return Err(Error::invalid(format!("{name} must be positive")));
    }
    Ok(v)
}

pub fn qubit_count(kind: QubitKind) -> Result<usize> {
    let overflow = || Error::invalid("qubit count overflows");
    match kind {
        QubitKind::JordanWigner { orbitals, electrons } => {
            let n = positive("orbitals", orbitals)?.checked_mul(2).ok_or_else(overflow)?;
            if electrons > n {
                return Err(Error::invalid(format!("{electrons} electrons do not fit in {n} spin orbitals")));
            }
            Ok(n)
        }
        QubitKind::DvrDirect { dims, points } => {
            positive("dims", dims)?.checked_mul(positive("points", points)?).ok_or_else(overflow)
        }
        QubitKind::DvrBinary { dims, points } => Ok(positive("dims", dims)? * log2_exact(positive("points", points)?)?),
        QubitKind::BosonBinary { modes, levels } => Ok(positive("modes", modes)? * log2_exact(positive("levels", levels)?)?),
    }
}

fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `C(n_orbitals, n_alpha) * C(n_orbitals, n_beta)`.
pub fn fci_dimension(n_alpha: u64, n_beta: u64, n_orbitals: u64) -> Result<BigUint> {
    if n_alpha > n_orbitals || n_beta > n_orbitals {
        return Err(Error::invalid(format!(
            "occupations ({n_alpha}, {n_beta}) exceed {n_orbitals} orbitals"
        )));
    }
    Ok(binomial(n_orbitals, n_alpha) * binomial(n_orbitals, n_beta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmrgCost {
    pub n_orbitals: u64,
    pub bond_dimension: u64,
    pub bytes_per_amplitude: u64,
    /// `N * D^3`.
    pub scale: u128,
    pub memory_bytes: u128,
}

pub fn dmrg_cost(n_orbitals: u64, bond_dimension: u64, bytes_per_amplitude: u64) -> Result<DmrgCost> {
    if n_orbitals == 0 || bond_dimension == 0 || bytes_per_amplitude == 0 {
        return Err(Error::invalid("DMRG cost inputs must be positive"));
    }
    let overflow = || Error::invalid("DMRG cost overflows 128 bits");
    let d = bond_dimension as u128;
    let scale = (n_orbitals as u128)
        .checked_mul(d)
        .and_then(|v| v.checked_mul(d))
        .and_then(|v| v.checked_mul(d))
        .ok_or_else(overflow)?;
    let memory_bytes = scale.checked_mul(bytes_per_amplitude as u128).ok_or_else(overflow)?;
    Ok(DmrgCost { n_orbitals, bond_dimension, bytes_per_amplitude, scale, memory_bytes })
}

/// Gates for one first-order step: a CNOT ladder on each side of every
/// Pauli rotation. Identity terms are a global phase and cost nothing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrotterCost {
    pub two_qubit_gates: usize,
    pub rotations: usize,
}

impl Add for TrotterCost {
    type Output = TrotterCost;

    fn add(self, o: TrotterCost) -> TrotterCost {
        TrotterCost { two_qubit_gates: self.two_qubit_gates + o.two_qubit_gates, rotations: self.rotations + o.rotations }
    }
}

/// Cost of a term list, counted as given (no merging of repeated strings).
pub fn trotter_cost_of_terms<'a>(terms: impl IntoIterator<Item = &'a PauliString>) -> TrotterCost {
    terms.into_iter().map(|s| s.weight()).filter(|&w| w > 0).fold(TrotterCost::default(), |acc, w| {
        acc + TrotterCost { two_qubit_gates: 2 * (w - 1), rotations: 1 }
    })
}

pub fn trotter_step_gates(h: &PauliOperator) -> Result<TrotterCost> {
    if h.num_terms() == 0 {
        return Err(Error::invalid("operator has no terms"));
    }
    Ok(trotter_cost_of_terms(h.iter().map(|(s, _)| s)))
}

/// Count of terms per Pauli weight, index = weight.
pub fn weight_histogram(h: &PauliOperator) -> Vec<usize> {
    let mut hist = vec![0; h.n_qubits() + 1];
    for (s, _) in h.iter() {
        hist[s.weight()] += 1;
    }
    while hist.len() > 1 && hist.last() == Some(&0) {
        hist.pop();
    }
    hist
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalComparators {
    /// Exact decimal digits.
    pub fci_dimension: String,
    pub fci_dimension_approx: f64,
    pub dmrg: DmrgCost,
}

impl ClassicalComparators {
    pub fn new(n_alpha: u64, n_beta: u64, n_orbitals: u64, bond_dimension: u64, bytes_per_amplitude: u64) -> Result<Self> {
        let fci = fci_dimension(n_alpha, n_beta, n_orbitals)?;
        Ok(ClassicalComparators {
            fci_dimension_approx: fci.to_string().parse().expect("decimal digits"),
            fci_dimension: fci.to_string(),
            // one DMRG site per spin orbital
            dmrg: dmrg_cost(2 * n_orbitals, bond_dimension, bytes_per_amplitude)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub mapping: String,
    pub n_qubits: usize,
    pub n_terms: usize,
    pub weight_histogram: Vec<usize>,
    pub trotter_step: TrotterCost,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalComparators>,
}

impl ResourceReport {
    pub fn new(mapping: impl Into<String>, h: &PauliOperator, classical: Option<ClassicalComparators>) -> Result<Self> {
        Ok(ResourceReport {
            mapping: mapping.into(),
            n_qubits: h.n_qubits(),
            n_terms: h.num_terms(),
            weight_histogram: weight_histogram(h),
            trotter_step: trotter_step_gates(h)?,
            classical,
        })
    }
}

/// One application row of the requirements table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementRow {
    pub application: String,
    pub model: String,
    pub size_minimum: String,
    pub size_target: String,
    pub qubits_minimum: usize,
    pub qubits_target: usize,
    pub interaction_structure: String,
    pub computational_target: String,
    pub accuracy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementsSummary {
    pub rows: Vec<RequirementRow>,
    pub classical: ClassicalComparators,
    /// Assumption behind the DMRG memory figure.
    pub notes: Vec<String>,
}

/// Grid points per nuclear degree of freedom used for the NQD rows.
pub const SUMMARY_GRID_POINTS: usize = 256;

pub fn requirements_summary() -> Result<RequirementsSummary> {
    let electronic = |minimum: usize, target: usize| -> Result<(usize, usize)> {
        Ok((
            qubit_count(QubitKind::JordanWigner { orbitals: minimum / 2, electrons: 0 })?,
            qubit_count(QubitKind::JordanWigner { orbitals: target / 2, electrons: 0 })?,
        ))
    };
    let (e_min, e_target) = electronic(64, 650)?;
    let nqd_min = qubit_count(QubitKind::DvrBinary { dims: 15, points: SUMMARY_GRID_POINTS })?;
    let nqd_target = qubit_count(QubitKind::DvrBinary { dims: 90, points: SUMMARY_GRID_POINTS })?;
    let row = |application: &str, model: &str, min: &str, target: &str, qubits: (usize, usize), goal: &str, accuracy: &str| RequirementRow {
        application: application.into(),
        model: model.into(),
        size_minimum: min.into(),
        size_target: target.into(),
        qubits_minimum: qubits.0,
        qubits_target: qubits.1,
        interaction_structure: "sparse irregular".into(),
        computational_target: goal.into(),
        accuracy: accuracy.into(),
    };
    let rows = vec![
        row("pathway energetics", "electronic structure", "64 spin orbitals", "650 spin orbitals", (e_min, e_target), "ground state", "1 mHartree"),
        row("quantum molecular dynamics", "electronic structure", "64 spin orbitals", "650 spin orbitals", (e_min, e_target), "ground state and forces", "1 mHartree"),
        row(
            "nuclear quantum dynamics",
            "nuclear grid Hamiltonian",
            "15 dimensions",
            "90 dimensions",
            (nqd_min, nqd_target),
            "reaction probability and rate",
            "10% in rate",
        ),
    ];
    let classical = ClassicalComparators::new(24, 24, 32, 5000, DEFAULT_BYTES_PER_AMPLITUDE)?;
    let notes = vec![
        format!("NQD qubits use binary grid encoding with {SUMMARY_GRID_POINTS} points per dimension"),
        format!("DMRG memory assumes {DEFAULT_BYTES_PER_AMPLITUDE} bytes per amplitude"),
    ];
    Ok(RequirementsSummary { rows, classical, notes })
}

fn human_bytes(b: u128) -> String {
    let units = ["B", "KB", "MB", "GB", "TB", "PB", "EB"];
    let mut v = b as f64;
    let mut i = 0;
    while v >= 1000.0 && i + 1 < units.len() {
        v /= 1000.0;
        i += 1;
    }
    format!("{v:.0} {}", units[i])
}

impl RequirementsSummary {
    pub fn to_markdown(&self) -> String {
        let mut out = String::from(
            "| application | model | size (min / target) | qubits (min / target) | interaction | target | accuracy |\n|---|---|---|---|---|---|---|\n",
        );
        for r in &self.rows {
            out += &format!(
                "| {} | {} | {} / {} | {} / {} | {} | {} | {} |\n",
                r.application, r.model, r.size_minimum, r.size_target, r.qubits_minimum, r.qubits_target, r.interaction_structure, r.computational_target, r.accuracy
            );
        }
        let c = &self.classical;
        out += &format!(
            "\nFCI dimension (24 alpha, 24 beta, 32 orbitals): {} ({:.4e})\n",
            c.fci_dimension, c.fci_dimension_approx
        );
        out += &format!(
            "DMRG N*D^3 (N = {} spin orbitals, D = {}): {:.3e}, memory {} at {} bytes/amplitude\n",
            c.dmrg.n_orbitals,
            c.dmrg.bond_dimension,
            c.dmrg.scale as f64,
            human_bytes(c.dmrg.memory_bytes),
            c.dmrg.bytes_per_amplitude
        );
        for n in &self.notes {
            out += &format!("\n- {n}");
        }
        out.push('\n');
        out
    }
}
