//! Unitary time evolution: Krylov-exact `exp(-iHt)` and Pauli product formulas.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliOperator, PauliString};
use crate::sparse::LinearOperator;
use crate::state::{dot, norm, StateVector};

#[derive(Debug, Clone)]
pub struct KrylovOptions {
    pub krylov_dim: usize,
    /// Local error target per unit time.
    pub tol: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions { krylov_dim: 40, tol: 1e-13 }
    }
}

/// `exp(-i H t) psi` by adaptive Lanczos substeps.
pub fn evolve_exact(op: &dyn LinearOperator, psi: &StateVector, t: f64) -> Result<StateVector> {
    evolve_exact_with(op, psi, t, &KrylovOptions::default())
}

pub fn evolve_exact_with(
    op: &dyn LinearOperator,
    psi: &StateVector,
    t: f64,
    opts: &KrylovOptions,
) -> Result<StateVector> {
    if op.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), actual: psi.dim() });
    }
    let mut amps = psi.amplitudes().to_vec();
    krylov_propagate(op, &mut amps, t, opts);
    Ok(psi.with_amplitudes(amps))
}

/// In-place Krylov propagation of a raw amplitude vector.
pub(crate) fn krylov_propagate(op: &dyn LinearOperator, amps: &mut [Complex64], t: f64, opts: &KrylovOptions) {
    if t == 0.0 {
        return;
    }
    let dim = op.dim();
    let total = t.abs();
    let sign = t.signum();
    let mut done = 0.0;
    let mut step_guess = total;
    while done < total {
        let v_norm = norm(amps);
        if v_norm == 0.0 {
            return;
        }
        let m_max = opts.krylov_dim.min(dim);
        let mut basis: Vec<Vec<Complex64>> = vec![amps.iter().map(|a| a / v_norm).collect()];
        let mut alphas = Vec::new();
        let mut betas = Vec::new();
        let mut w = vec![Complex64::default(); dim];
        let mut trailing_beta = 0.0;
        for j in 0..m_max {
            op.apply(&basis[j], &mut w);
            alphas.push(dot(&basis[j], &w).re);
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &w);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let beta = norm(&w);
            let scale = alphas.iter().fold(1.0f64, |a: f64, x: &f64| a.max(x.abs()));
            if beta <= 1e-13 * scale {
                trailing_beta = 0.0;
                break;
            }
            trailing_beta = beta;
            if j + 1 == m_max {
                break;
            }
            betas.push(beta);
            basis.push(w.iter().map(|x| x / beta).collect());
        }
        let m = alphas.len();
        let mut tri = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            tri[(i, i)] = alphas[i];
            if i + 1 < m {
                tri[(i, i + 1)] = betas[i];
                tri[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(tri);
        let coefficients = |tau: f64| -> Vec<Complex64> {
            (0..m)
                .map(|r| {
                    (0..m)
                        .map(|k| {
                            let phase = Complex64::new(0.0, -sign * eig.eigenvalues[k] * tau).exp();
                            phase * eig.eigenvectors[(r, k)] * eig.eigenvectors[(0, k)]
                        })
                        .sum()
                })
                .collect()
        };
        let remaining = total - done;
        let mut tau = step_guess.min(remaining);
        let mut c = coefficients(tau);
        if trailing_beta > 0.0 {
            loop {
                // The last Krylov coefficient cannot resolve below roundoff.
                let tail = c[m - 1].norm();
                if trailing_beta * tail <= opts.tol * tau || tail <= 64.0 * f64::EPSILON {
                    break;
                }
                tau *= 0.5;
                c = coefficients(tau);
            }
        } else {
            tau = remaining;
            c = coefficients(tau);
        }
        amps.iter_mut().for_each(|a| *a = Complex64::default());
        for (coef, v) in c.iter().zip(&basis) {
            amps.iter_mut().zip(v).for_each(|(a, x)| *a += x * coef * v_norm);
        }
        done += tau;
        step_guess = if tau >= step_guess { tau * 1.5 } else { tau };
        if remaining - tau < 1e-15 * total {
            break;
        }
    }
}

/// Product-formula order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrotterOrder {
    First,
    Second,
}

impl TryFrom<u8> for TrotterOrder {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(TrotterOrder::First),
            2 => Ok(TrotterOrder::Second),
            _ => Err(Error::invalid(format!("Trotter order must be 1 or 2, got {v}"))),
        }
    }
}

/// Applies `steps` Trotter steps of size `dt`, terms in lexicographic string order.
///
/// First order is `prod_k exp(-i c_k P_k dt)`; second order is the symmetric
/// sweep with half steps forward then backward.
pub fn evolve_trotter(
    h: &PauliOperator,
    psi: &StateVector,
    dt: f64,
    steps: usize,
    order: TrotterOrder,
) -> Result<StateVector> {
    let dim = 1usize << h.n_qubits();
    if psi.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: psi.dim() });
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    if !h.is_hermitian(1e-12) {
        return Err(Error::invalid("Trotter evolution needs real Pauli coefficients"));
    }
    let terms: Vec<(&PauliString, f64)> = h.iter().map(|(s, c)| (s, c.re)).collect();
    let mut amps = psi.amplitudes().to_vec();
    let mut scratch = vec![Complex64::default(); dim];
    for _ in 0..steps {
        match order {
            TrotterOrder::First => {
                for &(s, c) in &terms {
                    rotate(s, c * dt, &mut amps, &mut scratch);
                }
            }
            TrotterOrder::Second => {
                for &(s, c) in &terms {
                    rotate(s, c * dt * 0.5, &mut amps, &mut scratch);
                }
                for &(s, c) in terms.iter().rev() {
                    rotate(s, c * dt * 0.5, &mut amps, &mut scratch);
                }
            }
        }
    }
    Ok(psi.with_amplitudes(amps))
}

/// `amps <- exp(-i theta P) amps = cos(theta) amps - i sin(theta) P amps`.
fn rotate(s: &PauliString, theta: f64, amps: &mut [Complex64], scratch: &mut [Complex64]) {
    let (cos, sin) = (theta.cos(), theta.sin());
    scratch.iter_mut().for_each(|x| *x = Complex64::default());
    crate::pauli::apply_string_add(s, Complex64::new(0.0, -sin), amps, scratch);
    amps.iter_mut().zip(scratch.iter()).for_each(|(a, p)| *a = *a * cos + p);
}
