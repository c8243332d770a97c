//! Normal modes from tabulated surfaces and truncated bosonic Hamiltonians.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::DvrSystem;
use crate::error::{Error, Result};
use crate::pauli::{PauliOperator, DEFAULT_DROP_THRESHOLD};

/// Result of a finite-difference normal-mode analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicAnalysis {
    /// Real frequencies, ascending.
    pub frequencies: Vec<f64>,
    /// Mass-weighted displacement vectors, one per real frequency.
    pub modes: Vec<Vec<f64>>,
    /// Magnitudes of imaginary frequencies (negative curvature), ascending.
    pub imaginary_frequencies: Vec<f64>,
    pub imaginary_modes: Vec<Vec<f64>>,
    /// Grid index used as the expansion point.
    pub grid_index: Vec<usize>,
}

/// Mass-weighted Hessian at the grid point nearest `minimum`, by central
/// differences with one grid spacing per step.
pub fn harmonic_modes(sys: &DvrSystem, surface_index: usize, minimum: &[f64]) -> Result<HarmonicAnalysis> {
    let grid = &sys.grid;
    if minimum.len() != grid.dims() {
        return Err(Error::DimensionMismatch { expected: grid.dims(), actual: minimum.len() });
    }
    let e = sys.surface(surface_index)?;
    let mut center = Vec::with_capacity(grid.dims());
    for (a, (&x, axis)) in minimum.iter().zip(&grid.axes).enumerate() {
        match axis.nearest(x) {
            Some(i) if i > 0 && i + 1 < axis.points => center.push(i),
            _ => {
                return Err(Error::invalid(format!(
                    "expansion point {x} on axis {a} is on or outside the grid boundary"
                )))
            }
        }
    }
    let at = |shifts: &[(usize, i64)]| {
        let mut idx = center.clone();
        for &(a, d) in shifts {
            idx[a] = (idx[a] as i64 + d) as usize;
        }
        e[grid.ravel(&idx)]
    };
    let m = grid.dims();
    let mut hessian = DMatrix::<f64>::zeros(m, m);
    for a in 0..m {
        let da = grid.axes[a].dx;
        hessian[(a, a)] = (at(&[(a, 1)]) - 2.0 * at(&[]) + at(&[(a, -1)])) / (da * da);
        for b in a + 1..m {
            let db = grid.axes[b].dx;
            let v = (at(&[(a, 1), (b, 1)]) - at(&[(a, 1), (b, -1)]) - at(&[(a, -1), (b, 1)]) + at(&[(a, -1), (b, -1)]))
                / (4.0 * da * db);
            hessian[(a, b)] = v;
            hessian[(b, a)] = v;
        }
    }
    for a in 0..m {
        for b in 0..m {
            hessian[(a, b)] /= (grid.axes[a].mass * grid.axes[b].mass).sqrt();
        }
    }
    let eig = hessian.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut out = HarmonicAnalysis {
        frequencies: vec![],
        modes: vec![],
        imaginary_frequencies: vec![],
        imaginary_modes: vec![],
        grid_index: center,
    };
    for k in order {
        let lambda = eig.eigenvalues[k];
        let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        if lambda < 0.0 {
            out.imaginary_frequencies.push((-lambda).sqrt());
            out.imaginary_modes.push(v);
        } else {
            out.frequencies.push(lambda.sqrt());
            out.modes.push(v);
        }
    }
    out.imaginary_frequencies.sort_by(f64::total_cmp);
    Ok(out)
}

/// `coefficient * prod Q_mode^power` in mass-weighted normal coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialTerm {
    pub coefficient: f64,
    pub powers: Vec<(usize, u32)>,
}

impl PotentialTerm {
    pub fn order(&self) -> u32 {
        self.powers.iter().map(|&(_, p)| p).sum()
    }
}

/// `sum_a omega_a (n_a + 1/2) + sum_terms K prod Q^p`, each mode truncated to
/// `truncation` Fock levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VibrationalHamiltonian {
    pub frequencies: Vec<f64>,
    pub terms: Vec<PotentialTerm>,
    pub truncation: usize,
}

impl VibrationalHamiltonian {
    pub fn new(frequencies: Vec<f64>, terms: Vec<PotentialTerm>, truncation: usize) -> Result<Self> {
        if let Some(w) = frequencies.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::invalid(format!("mode frequency must be positive, got {w}")));
        }
        if truncation < 2 {
            return Err(Error::invalid(format!("Fock truncation must be at least 2, got {truncation}")));
        }
        if !truncation.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(truncation));
        }
        for t in &terms {
            if t.order() < 2 {
                return Err(Error::invalid("potential terms must have order 2 or higher"));
            }
            if let Some(&(m, _)) = t.powers.iter().find(|&&(m, _)| m >= frequencies.len()) {
                return Err(Error::IndexOutOfRange { index: m, limit: frequencies.len() });
            }
        }
        Ok(VibrationalHamiltonian { frequencies, terms, truncation })
    }

    pub fn qubits_per_mode(&self) -> usize {
        self.truncation.trailing_zeros() as usize
    }

    pub fn n_qubits(&self) -> usize {
        self.frequencies.len() * self.qubits_per_mode()
    }

    /// `Q = (a + a+) / sqrt(2 omega)` truncated to the retained Fock block.
    pub fn position_matrix(&self, mode: usize) -> DMatrix<f64> {
        let n = self.truncation;
        let scale = 1.0 / (2.0 * self.frequencies[mode]).sqrt();
        DMatrix::from_fn(n, n, |i, j| {
            if i + 1 == j || j + 1 == i {
                scale * (i.max(j) as f64).sqrt()
            } else {
                0.0
            }
        })
    }
}

/// Binary-encoded Pauli operator; mode `a` occupies qubits
/// `a*K .. (a+1)*K` with `K = log2 n`, Fock level `v = sum_j b_j 2^j`.
pub fn build_vibrational_hamiltonian(vh: &VibrationalHamiltonian) -> Result<PauliOperator> {
    let k = vh.qubits_per_mode();
    let n_qubits = vh.n_qubits();
    let n = vh.truncation;
    let mut op = PauliOperator::zero(n_qubits);
    for (a, &w) in vh.frequencies.iter().enumerate() {
        let levels: Vec<f64> = (0..n).map(|v| w * (v as f64 + 0.5)).collect();
        let local = PauliOperator::from_diagonal(&levels, DEFAULT_DROP_THRESHOLD)?.embed(n_qubits, a * k)?;
        accumulate(&mut op, &local)?;
    }
    for term in &vh.terms {
        if term.coefficient == 0.0 {
            continue;
        }
        let mut product = PauliOperator::identity(n_qubits, term.coefficient);
        let mut by_mode = std::collections::BTreeMap::<usize, u32>::new();
        for &(m, p) in &term.powers {
            *by_mode.entry(m).or_default() += p;
        }
        for (m, p) in by_mode {
            let q = vh.position_matrix(m);
            let mut power = DMatrix::<f64>::identity(n, n);
            for _ in 0..p {
                power = &power * &q;
            }
            let local = PauliOperator::from_matrix(&power.map(|v| Complex64::new(v, 0.0)), DEFAULT_DROP_THRESHOLD)?
                .embed(n_qubits, m * k)?;
            product = product.multiply(&local)?;
        }
        accumulate(&mut op, &product)?;
    }
    op.simplify(DEFAULT_DROP_THRESHOLD);
    Ok(op)
}

fn accumulate(target: &mut PauliOperator, other: &PauliOperator) -> Result<()> {
    for (s, c) in other.iter() {
        target.add_term(s.clone(), *c)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nuclear::grid::{DvrAxis, DvrGrid};
    use crate::sparse::dense_eigenvalues;

    fn grid2(l: usize) -> DvrGrid {
        let ax = DvrAxis::spanning(l, -2.0, 2.0, 1.0).unwrap();
        DvrGrid::new(vec![ax.clone(), ax]).unwrap()
    }

    #[test]
    fn quadratic_surface_frequencies() {
        let ax = DvrAxis::spanning(21, -2.0, 2.0, 1.0).unwrap();
        let sys = DvrSystem::from_fn(DvrGrid::new(vec![ax]).unwrap(), 1, |_, x| 0.5 * x[0] * x[0]).unwrap();
        let h = harmonic_modes(&sys, 0, &[0.0]).unwrap();
        assert!((h.frequencies[0] - 1.0).abs() < 1e-6);

        let sys = DvrSystem::from_fn(grid2(21), 1, |_, x| 0.5 * x[0] * x[0] + 2.0 * x[1] * x[1]).unwrap();
        let h = harmonic_modes(&sys, 0, &[0.0, 0.0]).unwrap();
        assert!((h.frequencies[0] - 1.0).abs() < 1e-6);
        assert!((h.frequencies[1] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn saddle_reports_imaginary_mode() {
        let sys = DvrSystem::from_fn(grid2(21), 1, |_, x| 0.5 * (x[0] * x[0] - x[1] * x[1])).unwrap();
        let h = harmonic_modes(&sys, 0, &[0.0, 0.0]).unwrap();
        assert_eq!(h.frequencies.len(), 1);
        assert_eq!(h.imaginary_frequencies.len(), 1);
        assert!((h.frequencies[0] - 1.0).abs() < 1e-6);
        assert!((h.imaginary_frequencies[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn boundary_minimum_is_rejected() {
        let sys = DvrSystem::from_fn(grid2(5), 1, |_, x| x[0]).unwrap();
        assert!(harmonic_modes(&sys, 0, &[-2.0, 0.0]).is_err());
        assert!(harmonic_modes(&sys, 0, &[0.0, 9.0]).is_err());
    }

    #[test]
    fn two_level_harmonic_block() {
        let vh = VibrationalHamiltonian::new(vec![1.0], vec![], 2).unwrap();
        let op = build_vibrational_hamiltonian(&vh).unwrap();
        assert_eq!(op.n_qubits(), 1);
        assert_eq!(dense_eigenvalues(&op.to_matrix().unwrap().to_dense()), vec![0.5, 1.5]);
    }

    #[test]
    fn validation() {
        assert!(VibrationalHamiltonian::new(vec![1.0], vec![], 1).is_err());
        assert!(VibrationalHamiltonian::new(vec![1.0], vec![], 3).is_err());
        assert!(VibrationalHamiltonian::new(vec![0.0], vec![], 2).is_err());
        let bad = PotentialTerm { coefficient: 1.0, powers: vec![(3, 3)] };
        assert!(VibrationalHamiltonian::new(vec![1.0], vec![bad], 2).is_err());
    }

    #[test]
    fn harmonic_input_emits_no_coupling() {
        let zero = PotentialTerm { coefficient: 0.0, powers: vec![(0, 1), (1, 2)] };
        let vh = VibrationalHamiltonian::new(vec![1.0, 2.0], vec![zero], 4).unwrap();
        let op = build_vibrational_hamiltonian(&vh).unwrap();
        for (s, _) in op.iter() {
            let low = (0..2).any(|q| s.get(q) != crate::pauli::Pauli::I);
            let high = (2..4).any(|q| s.get(q) != crate::pauli::Pauli::I);
            assert!(!(low && high), "cross-mode string {s}");
        }
    }
}
