//! Grid Hamiltonians as Pauli operators.
//!
//! Binary: axis `a` uses `log2 L_a` qubits; the last axis sits on the lowest
//! qubits, so basis index = flat grid index and the mapped matrix equals the
//! DVR matrix entry for entry.
//!
//! Direct (one-hot): axis `a` owns qubits `a*L .. (a+1)*L`, grid point `i`
//! on that axis is the single excitation of qubit `a*L + i`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::dvr::sinc_dvr_kinetic;
use super::grid::DvrSystem;
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliOperator, PauliString, DEFAULT_DROP_THRESHOLD};

pub fn direct_qubit_count(dims: usize, points: usize) -> usize {
    dims * points
}

/// `M * log2 L`; `None` when `L` is not a power of two.
pub fn binary_qubit_count(dims: usize, points: usize) -> Option<usize> {
    points.is_power_of_two().then(|| dims * points.trailing_zeros() as usize)
}

pub fn binary_map(sys: &DvrSystem, surface_index: usize) -> Result<PauliOperator> {
    let shape = sys.grid.shape();
    if let Some(&bad) = shape.iter().find(|l| !l.is_power_of_two()) {
        return Err(Error::NotPowerOfTwo(bad));
    }
    let bits: Vec<usize> = shape.iter().map(|l| l.trailing_zeros() as usize).collect();
    let n_qubits: usize = bits.iter().sum();
    let potential = sys.surface(surface_index)?;
    let mut op = PauliOperator::from_diagonal(potential, DEFAULT_DROP_THRESHOLD)?;
    for (a, axis) in sys.grid.axes.iter().enumerate() {
        let t = sinc_dvr_kinetic(axis).map(|v| Complex64::new(v, 0.0));
        let local = PauliOperator::from_matrix(&t, DEFAULT_DROP_THRESHOLD)?;
        let offset: usize = bits[a + 1..].iter().sum();
        let embedded = local.embed(n_qubits, offset)?;
        for (s, c) in embedded.iter() {
            op.add_term(s.clone(), *c)?;
        }
    }
    op.simplify(DEFAULT_DROP_THRESHOLD);
    Ok(op)
}

pub fn direct_map(sys: &DvrSystem, surface_index: usize) -> Result<PauliOperator> {
    let shape = sys.grid.shape();
    let n_qubits: usize = shape.iter().sum();
    let potential = sys.surface(surface_index)?;
    let offsets: Vec<usize> = shape.iter().scan(0, |acc, &l| {
        let o = *acc;
        *acc += l;
        Some(o)
    }).collect();
    let mut terms: BTreeMap<PauliString, Complex64> = BTreeMap::new();
    let mut add = |s: PauliString, c: f64| *terms.entry(s).or_default() += c;

    for (a, axis) in sys.grid.axes.iter().enumerate() {
        let t = sinc_dvr_kinetic(axis);
        for i in 0..axis.points {
            let qi = offsets[a] + i;
            // T_ii n_i = T_ii (I - Z_i) / 2
            add(PauliString::identity(n_qubits), 0.5 * t[(i, i)]);
            add(PauliString::single(n_qubits, qi, Pauli::Z)?, -0.5 * t[(i, i)]);
            for j in i + 1..axis.points {
                // T_ij (s+_i s-_j + s+_j s-_i) = T_ij (X_i X_j + Y_i Y_j) / 2
                let qj = offsets[a] + j;
                add(PauliString::from_letters(n_qubits, &[(qi, Pauli::X), (qj, Pauli::X)])?, 0.5 * t[(i, j)]);
                add(PauliString::from_letters(n_qubits, &[(qi, Pauli::Y), (qj, Pauli::Y)])?, 0.5 * t[(i, j)]);
            }
        }
    }

    // E(g) prod_a n_{a, g_a}, each projector expanded as (I - Z) / 2.
    let dims = shape.len();
    let weight = 0.5f64.powi(dims as i32);
    for (g, &e) in potential.iter().enumerate() {
        if e == 0.0 {
            continue;
        }
        let idx = sys.grid.unravel(g);
        for subset in 0..1usize << dims {
            let letters: Vec<(usize, Pauli)> = (0..dims)
                .filter(|a| subset >> a & 1 == 1)
                .map(|a| (offsets[a] + idx[a], Pauli::Z))
                .collect();
            let sign = if letters.len() % 2 == 0 { 1.0 } else { -1.0 };
            add(PauliString::from_letters(n_qubits, &letters)?, sign * weight * e);
        }
    }
    let mut op = PauliOperator::from_terms(n_qubits, terms)?;
    op.simplify(DEFAULT_DROP_THRESHOLD);
    Ok(op)
}

/// Computational basis states with exactly one excitation per axis register,
/// in flat grid order.
pub fn one_hot_basis(sys: &DvrSystem) -> Result<Vec<u64>> {
    let shape = sys.grid.shape();
    let n_qubits: usize = shape.iter().sum();
    if n_qubits > 64 {
        return Err(Error::CapExceeded {
            what: "one-hot basis".into(),
            requested: format!("{n_qubits} qubits"),
            cap: "64".into(),
        });
    }
    let n = sys.grid.n_points()?;
    Ok((0..n)
        .map(|g| {
            let mut offset = 0;
            let mut b = 0u64;
            for (&i, &l) in sys.grid.unravel(g).iter().zip(&shape) {
                b |= 1 << (offset + i);
                offset += l;
            }
            b
        })
        .collect())
}

/// Direct-mapped operator compressed onto the one-hot subspace.
pub fn one_hot_matrix(op: &PauliOperator, sys: &DvrSystem) -> Result<DMatrix<Complex64>> {
    op.restricted_matrix(&one_hot_basis(sys)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nuclear::grid::{DvrAxis, DvrGrid};

    #[test]
    fn qubit_counts() {
        assert_eq!(direct_qubit_count(15, 256), 3840);
        assert_eq!(binary_qubit_count(15, 256), Some(120));
        assert_eq!(binary_qubit_count(72, 256), Some(576));
        assert_eq!(binary_qubit_count(90, 256), Some(720));
        assert_eq!(binary_qubit_count(1, 6), None);
    }

    #[test]
    fn binary_map_rejects_non_power_of_two() {
        let ax = DvrAxis::new(3, 0.0, 1.0, 1.0).unwrap();
        let sys = DvrSystem::new(DvrGrid::new(vec![ax]).unwrap(), vec![vec![0.0; 3]]).unwrap();
        assert!(matches!(binary_map(&sys, 0), Err(Error::NotPowerOfTwo(3))));
    }

    #[test]
    fn diagonal_only_direct_map_is_diagonal() {
        // Infinite mass removes the kinetic term.
        let ax = DvrAxis::new(3, 0.0, 1.0, f64::MAX).unwrap();
        let sys = DvrSystem::new(DvrGrid::new(vec![ax]).unwrap(), vec![vec![1.0, -2.0, 0.5]]).unwrap();
        let op = direct_map(&sys, 0).unwrap();
        assert!(op.is_diagonal());
        let m = one_hot_matrix(&op, &sys).unwrap();
        for (i, v) in [1.0, -2.0, 0.5].iter().enumerate() {
            assert!((m[(i, i)].re - v).abs() < 1e-12);
        }
    }
}
