use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::{DvrAxis, DvrSystem};
use crate::error::Result;
use crate::sparse::{LinearOperator, SparseMatrix};

/// Colbert-Miller sinc-DVR kinetic energy matrix for one axis (hbar = 1).
pub fn sinc_dvr_kinetic(axis: &DvrAxis) -> DMatrix<f64> {
    let scale = 1.0 / (axis.mass * axis.dx * axis.dx);
    DMatrix::from_fn(axis.points, axis.points, |i, j| {
        if i == j {
            std::f64::consts::PI.powi(2) / 6.0 * scale
        } else {
            let d = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            sign * scale / (d * d)
        }
    })
}

/// Explicit sparse Hamiltonian `sum_a T^a + diag(E_I)` on one surface.
pub fn build_dvr_hamiltonian(sys: &DvrSystem, surface_index: usize) -> Result<SparseMatrix> {
    let n = sys.grid.n_points()?;
    let potential = sys.surface(surface_index)?;
    let kinetic: Vec<DMatrix<f64>> = sys.grid.axes.iter().map(sinc_dvr_kinetic).collect();
    let strides: Vec<usize> = (0..sys.grid.dims()).map(|a| sys.grid.stride(a)).collect();
    let rows = (0..n)
        .into_par_iter()
        .map(|g| {
            let idx = sys.grid.unravel(g);
            let mut row = vec![(g, Complex64::new(potential[g], 0.0))];
            for (a, t) in kinetic.iter().enumerate() {
                let i = idx[a];
                let base = g - i * strides[a];
                for j in 0..t.ncols() {
                    row.push((base + j * strides[a], Complex64::new(t[(i, j)], 0.0)));
                }
            }
            row
        })
        .collect();
    Ok(SparseMatrix::from_rows(n, rows))
}

/// Matrix-free coupled-surface Hamiltonian. Vectors are surface-major:
/// entry `I * n_points + g` is the amplitude on surface `I` at point `g`.
#[derive(Debug, Clone)]
pub struct DvrOperator {
    shape: Vec<usize>,
    kinetic: Vec<DMatrix<f64>>,
    potentials: Vec<Vec<f64>>,
    couplings: Vec<(usize, usize, Vec<f64>)>,
    n_points: usize,
}

impl DvrOperator {
    pub fn new(sys: &DvrSystem) -> Result<Self> {
        let n_points = sys.grid.n_points()?;
        super::grid::check_grid_size(&[n_points, sys.n_surfaces()], super::grid::max_grid_points())?;
        Ok(DvrOperator {
            shape: sys.grid.shape(),
            kinetic: sys.grid.axes.iter().map(sinc_dvr_kinetic).collect(),
            potentials: sys.surfaces.clone(),
            couplings: sys.couplings.iter().map(|(&(i, j), v)| (i, j, v.clone())).collect(),
            n_points,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_surfaces(&self) -> usize {
        self.potentials.len()
    }

    pub fn kinetic(&self, axis: usize) -> &DMatrix<f64> {
        &self.kinetic[axis]
    }

    pub fn potential(&self, surface: usize) -> &[f64] {
        &self.potentials[surface]
    }

    pub fn couplings(&self) -> &[(usize, usize, Vec<f64>)] {
        &self.couplings
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// `out += (sum_a T^a) input` for one surface block.
    pub fn add_kinetic(&self, input: &[Complex64], out: &mut [Complex64]) {
        for (a, t) in self.kinetic.iter().enumerate() {
            let stride: usize = self.shape[a + 1..].iter().product();
            apply_along_axis(t, self.shape[a], stride, input, out, |acc, v| *acc += v);
        }
    }
}

/// Applies the `l x l` matrix `m` along one axis of a row-major array:
/// `combine(out[line j], sum_k m[j,k] in[line k])`.
pub(crate) fn apply_along_axis<M, T>(
    m: &M,
    l: usize,
    stride: usize,
    input: &[Complex64],
    out: &mut [Complex64],
    combine: impl Fn(&mut Complex64, Complex64) + Sync,
) where
    M: std::ops::Index<(usize, usize), Output = T> + Sync,
    T: Copy + std::ops::Mul<Complex64, Output = Complex64>,
{
    let block = l * stride;
    out.par_chunks_mut(block).zip(input.par_chunks(block)).for_each(|(ob, ib)| {
        let mut line = vec![Complex64::default(); l];
        for inner in 0..stride {
            for (k, v) in line.iter_mut().enumerate() {
                *v = ib[k * stride + inner];
            }
            for j in 0..l {
                let mut acc = Complex64::default();
                for (k, v) in line.iter().enumerate() {
                    acc += m[(j, k)] * *v;
                }
                combine(&mut ob[j * stride + inner], acc);
            }
        }
    });
}

impl LinearOperator for DvrOperator {
    fn dim(&self) -> usize {
        self.n_points * self.potentials.len()
    }

    fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        let n = self.n_points;
        for (s, v) in self.potentials.iter().enumerate() {
            let (ib, ob) = (&input[s * n..(s + 1) * n], &mut out[s * n..(s + 1) * n]);
            ob.par_iter_mut().zip(ib.par_iter()).zip(v.par_iter()).for_each(|((o, i), v)| *o = i * v);
            self.add_kinetic(ib, ob);
        }
        for (i, j, v) in &self.couplings {
            for g in 0..n {
                let (a, b) = (input[i * n + g], input[j * n + g]);
                out[i * n + g] += v[g] * b;
                out[j * n + g] += v[g] * a;
            }
        }
    }
}
