//! Lowest eigenpairs of Hermitian operators by Lanczos iteration with full
//! reorthogonalization and explicit locking.
//!
//! Each eigenpair is found by a separate Lanczos run started from a seeded
//! random vector that is kept orthogonal to every pair already locked, so
//! degenerate levels are recovered one copy at a time. A run that does not
//! converge within its Krylov budget restarts from its best Ritz vector.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sparse::LinearOperator;
use crate::state::{dot, norm};

/// Seed of the random start vectors.
pub const LANCZOS_SEED: u64 = 0x5EED;

/// Default residual tolerance (Hartree).
pub const DEFAULT_EIGEN_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub k: usize,
    pub tol: f64,
    /// Krylov vectors per run before a restart.
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub seed: u64,
    /// Keep locking pairs until the ground level's full multiplicity is known.
    pub resolve_degeneracy: bool,
    /// Eigenvalues within this distance of the ground value count as degenerate.
    pub degeneracy_tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            k: 1,
            tol: DEFAULT_EIGEN_TOL,
            krylov_dim: 200,
            max_restarts: 60,
            seed: LANCZOS_SEED,
            resolve_degeneracy: true,
            degeneracy_tol: 1e-7,
        }
    }
}

impl EigenOptions {
    pub fn new(k: usize, tol: f64) -> Self {
        EigenOptions { k, tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
    /// Total operator applications.
    pub iterations: usize,
    /// Number of eigenvalues found within the degeneracy tolerance of the
    /// lowest one (a lower bound when degeneracy resolution is off).
    pub ground_degeneracy: usize,
}

/// `k` lowest eigenpairs with residuals `||Hv - lv|| <= tol`.
pub fn ground_states(op: &dyn LinearOperator, k: usize, tol: f64) -> Result<SpectralResult> {
    ground_states_with(op, &EigenOptions::new(k, tol), None)
}

/// As [`ground_states`], optionally warm-starting the first run from `start`.
pub fn ground_states_with(
    op: &dyn LinearOperator,
    opts: &EigenOptions,
    start: Option<&[Complex64]>,
) -> Result<SpectralResult> {
    let dim = op.dim();
    if opts.k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if opts.k > dim {
        return Err(Error::invalid(format!("k = {} exceeds dimension {dim}", opts.k)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    check_hermitian(op, &mut rng)?;

    let mut locked: Vec<Vec<Complex64>> = Vec::new();
    let mut values = Vec::new();
    let mut residuals = Vec::new();
    let mut applications = 0;

    loop {
        let want_more = locked.len() < opts.k
            || (opts.resolve_degeneracy
                && locked.len() < dim
                && (values.last().copied().unwrap_or(f64::INFINITY) - values[0]).abs() <= opts.degeneracy_tol);
        if !want_more {
            break;
        }
        let seed_vec = match (locked.is_empty(), start) {
            (true, Some(s)) if s.len() == dim => s.to_vec(),
            _ => random_vector(dim, &mut rng),
        };
        let (value, vector, residual, used) = lowest_pair(op, &locked, seed_vec, opts, &mut rng)?;
        applications += used;
        locked.push(vector);
        values.push(value);
        residuals.push(residual);
    }

    // Locking order is ascending up to rounding; sort to make it exact.
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let ground_degeneracy = eigenvalues
        .iter()
        .filter(|&&v| (v - eigenvalues[0]).abs() <= opts.degeneracy_tol)
        .count();
    let mut eigenvectors: Vec<Vec<Complex64>> = order.iter().map(|&i| locked[i].clone()).collect();
    let mut residuals: Vec<f64> = order.iter().map(|&i| residuals[i]).collect();
    eigenvectors.truncate(opts.k);
    residuals.truncate(opts.k);
    Ok(SpectralResult {
        eigenvalues: eigenvalues[..opts.k].to_vec(),
        eigenvectors,
        residuals,
        iterations: applications,
        ground_degeneracy,
    })
}

fn random_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..dim)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

fn check_hermitian(op: &dyn LinearOperator, rng: &mut ChaCha8Rng) -> Result<()> {
    let dim = op.dim();
    let u = random_vector(dim, rng);
    let v = random_vector(dim, rng);
    let mut hu = vec![Complex64::default(); dim];
    let mut hv = vec![Complex64::default(); dim];
    op.apply(&u, &mut hu);
    op.apply(&v, &mut hv);
    let a = dot(&u, &hv);
    let b = dot(&v, &hu).conj();
    let scale = norm(&u) * norm(&v) * (1.0 + norm(&hu).max(norm(&hv)));
    let deviation = (a - b).norm() / scale;
    if deviation > 1e-10 {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Removes components along `basis` (twice, for stability).
fn orthogonalize(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
}

fn lowest_pair(
    op: &dyn LinearOperator,
    locked: &[Vec<Complex64>],
    mut start: Vec<Complex64>,
    opts: &EigenOptions,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, Vec<Complex64>, f64, usize)> {
    let dim = op.dim();
    let space = dim - locked.len();
    let mut applications = 0;
    let mut best_residual = f64::INFINITY;

    for _restart in 0..=opts.max_restarts {
        orthogonalize(&mut start, locked);
        let mut n0 = norm(&start);
        if n0 < 1e-10 {
            start = random_vector(dim, rng);
            orthogonalize(&mut start, locked);
            n0 = norm(&start);
        }
        start.iter_mut().for_each(|x| *x /= n0);

        let m_max = opts.krylov_dim.min(space).max(1);
        let mut basis: Vec<Vec<Complex64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = vec![Complex64::default(); dim];
        let mut exhausted = false;

        for j in 0..m_max {
            op.apply(&basis[j], &mut w);
            applications += 1;
            let alpha = dot(&basis[j], &w).re;
            alphas.push(alpha);
            orthogonalize(&mut w, locked);
            orthogonalize(&mut w, &basis);
            let beta = norm(&w);
            let scale = alphas.iter().fold(1.0f64, |a, x| a.max(x.abs()));
            if beta <= 1e-12 * scale || j + 1 == m_max {
                exhausted = beta <= 1e-12 * scale || j + 1 == space;
                break;
            }
            // Cheap convergence probe every few steps.
            if j >= 4 && j % 5 == 4 {
                let (theta, y) = tridiagonal_lowest(&alphas, &betas);
                let _ = theta;
                if (beta * y[y.len() - 1]).abs() < 0.1 * opts.tol {
                    break;
                }
            }
            betas.push(beta);
            basis.push(w.iter().map(|x| x / beta).collect());
        }

        let (_, y) = tridiagonal_lowest(&alphas, &betas);
        let mut ritz = vec![Complex64::default(); dim];
        for (coef, v) in y.iter().zip(&basis) {
            ritz.iter_mut().zip(v).for_each(|(r, x)| *r += x * *coef);
        }
        orthogonalize(&mut ritz, locked);
        let rn = norm(&ritz);
        ritz.iter_mut().for_each(|x| *x /= rn);
        op.apply(&ritz, &mut w);
        applications += 1;
        let theta = dot(&ritz, &w).re;
        let residual = norm(&w.iter().zip(&ritz).map(|(hw, r)| hw - r * theta).collect::<Vec<_>>());
        best_residual = best_residual.min(residual);
        if residual <= opts.tol || (exhausted && residual <= opts.tol.max(1e-9)) {
            return Ok((theta, ritz, residual, applications));
        }
        start = ritz;
    }
    Err(Error::NoConvergence { residual: best_residual, iterations: applications })
}

/// Lowest eigenpair of the symmetric tridiagonal matrix.
fn tridiagonal_lowest(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty tridiagonal");
    (theta, eig.eigenvectors.column(idx).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliOperator;
    use crate::sparse::{dense_eigenvalues, SparseMatrix};

    fn real_diag(values: &[f64]) -> SparseMatrix {
        SparseMatrix::from_triplets(
            values.len(),
            values.iter().enumerate().map(|(i, &v)| (i, i, Complex64::new(v, 0.0))),
        )
    }

    #[test]
    fn diagonal_matrix_ground_state() {
        let res = ground_states(&real_diag(&[3.0, 1.0, 2.0]), 1, 1e-10).unwrap();
        assert!((res.eigenvalues[0] - 1.0).abs() < 1e-12);
        let v = &res.eigenvectors[0];
        assert!((v[1].norm() - 1.0).abs() < 1e-10);
        assert!(v[0].norm() < 1e-6 && v[2].norm() < 1e-6);
        assert_eq!(res.ground_degeneracy, 1);
    }

    #[test]
    fn heisenberg_dimer_ground_energy() {
        let h = PauliOperator::from_labels(2, &[("X0 X1", 1.0), ("Y0 Y1", 1.0), ("Z0 Z1", 1.0)]).unwrap();
        let res = ground_states(&h.to_matrix().unwrap(), 1, 1e-10).unwrap();
        assert!((res.eigenvalues[0] + 3.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_levels_are_counted() {
        let m = real_diag(&[1.0, -2.0, 5.0, -2.0, 0.0, -2.0]);
        let res = ground_states(&m, 2, 1e-10).unwrap();
        assert_eq!(res.ground_degeneracy, 3);
        assert!((res.eigenvalues[1] + 2.0).abs() < 1e-10);
    }

    #[test]
    fn k_lowest_match_dense_spectrum() {
        let h = PauliOperator::from_labels(
            4,
            &[("X0 X1", 0.7), ("Z1 Z2", -1.1), ("Y2 Y3", 0.4), ("Z0", 0.3), ("X3", 0.9), ("Z0 Z3", 0.2)],
        )
        .unwrap();
        let m = h.to_matrix().unwrap();
        let dense = dense_eigenvalues(&m.to_dense());
        let res = ground_states(&m, 4, 1e-10).unwrap();
        for (a, b) in res.eigenvalues.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        for r in &res.residuals {
            assert!(*r <= 1e-10);
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let h = PauliOperator::from_labels(3, &[("X0 X1", 1.0), ("Z1 Z2", 0.5), ("Y0 Z2", 0.25)]).unwrap();
        let m = h.to_matrix().unwrap();
        let a = ground_states(&m, 2, 1e-10).unwrap();
        let b = ground_states(&m, 2, 1e-10).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = SparseMatrix::from_triplets(2, [(0, 1, Complex64::new(1.0, 0.0))]);
        assert!(matches!(ground_states(&m, 1, 1e-8), Err(Error::NotHermitian { .. })));
    }
}
