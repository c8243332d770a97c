use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::sparse::LinearOperator;

/// Tolerance on `| ||psi|| - 1 |` for a state to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// What the amplitude indices of a [`StateVector`] label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// Computational basis of a qubit register, qubit 0 least significant.
    Qubit { n_qubits: usize },
    /// Occupation-number determinants; bit `p` of the index is `n_p`.
    Determinant { n_modes: usize },
    /// Product grid, row-major with the last axis fastest, stacked per surface.
    Grid { shape: Vec<usize>, surfaces: usize },
}

impl Basis {
    pub fn dim(&self) -> usize {
        match self {
            Basis::Qubit { n_qubits } => 1 << n_qubits,
            Basis::Determinant { n_modes } => 1 << n_modes,
            Basis::Grid { shape, surfaces } => shape.iter().product::<usize>() * surfaces,
        }
    }
}

/// Normalized complex amplitudes over a labeled basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: Basis,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Normalizes `amplitudes`; fails on a zero vector or a length mismatch.
    pub fn new(basis: Basis, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), actual: amplitudes.len() });
        }
        let norm = norm(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("state has zero or non-finite norm"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(StateVector { basis, amplitudes })
    }

    /// Wraps amplitudes that must already be normalized.
    pub fn from_normalized(basis: Basis, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), actual: amplitudes.len() });
        }
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(StateVector { basis, amplitudes })
    }

    pub fn basis_state(basis: Basis, index: usize) -> Result<Self> {
        let dim = basis.dim();
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, limit: dim });
        }
        let mut amplitudes = vec![Complex64::default(); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { basis, amplitudes })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: other.dim() });
        }
        Ok(dot(&self.amplitudes, &other.amplitudes))
    }

    /// `<psi|A|psi>` for any linear operator.
    pub fn expectation(&self, op: &dyn LinearOperator) -> Result<Complex64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: op.dim(), actual: self.dim() });
        }
        let mut tmp = vec![Complex64::default(); self.dim()];
        op.apply(&self.amplitudes, &mut tmp);
        Ok(dot(&self.amplitudes, &tmp))
    }

    pub(crate) fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> StateVector {
        StateVector { basis: self.basis.clone(), amplitudes }
    }
}

/// `<psi|op|psi>` evaluated term by term without building a matrix.
pub fn op_expectation(op: &PauliOperator, psi: &StateVector) -> Result<Complex64> {
    let expected = 1usize
        .checked_shl(op.n_qubits() as u32)
        .ok_or_else(|| Error::invalid("register too large for a state vector"))?;
    if psi.dim() != expected {
        return Err(Error::DimensionMismatch { expected, actual: psi.dim() });
    }
    let n = psi.norm();
    if (n - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm: n });
    }
    let amps = psi.amplitudes();
    let mut total = Complex64::default();
    for (s, c) in op.iter() {
        let mut acc = Complex64::default();
        for (b, a) in amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let (phase, image) = s.apply_to_basis(b as u64);
            acc += amps[image as usize].conj() * phase * a;
        }
        total += c * acc;
    }
    Ok(total)
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliOperator;

    fn qubits(n: usize) -> Basis {
        Basis::Qubit { n_qubits: n }
    }

    #[test]
    fn z_on_zero_is_plus_one() {
        let z = PauliOperator::from_labels(1, &[("Z0", 1.0)]).unwrap();
        let psi = StateVector::basis_state(qubits(1), 0).unwrap();
        assert_eq!(op_expectation(&z, &psi).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn z_on_plus_is_zero() {
        let z = PauliOperator::from_labels(1, &[("Z0", 1.0)]).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let psi = StateVector::new(qubits(1), vec![one, one]).unwrap();
        assert!(op_expectation(&z, &psi).unwrap().norm() < 1e-15);
    }

    #[test]
    fn rejects_wrong_dimension_and_unnormalized() {
        let z = PauliOperator::from_labels(2, &[("Z0", 1.0)]).unwrap();
        let psi = StateVector::basis_state(qubits(1), 0).unwrap();
        assert!(matches!(op_expectation(&z, &psi), Err(Error::DimensionMismatch { .. })));
        let bad = StateVector { basis: qubits(2), amplitudes: vec![Complex64::new(2.0, 0.0); 4] };
        assert!(matches!(op_expectation(&z, &bad), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn zero_vector_is_rejected() {
        assert!(StateVector::new(qubits(1), vec![Complex64::default(); 2]).is_err());
    }
}
