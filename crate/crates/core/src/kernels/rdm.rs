//! One- and two-body reduced density matrices of determinant-basis states.
//!
//! Conventions: `rdm1[p][q] = <a+_q a_p>` and
//! `rdm2[p][q][r][s] = <a+_q a+_p a_r a_s>`, with Jordan-Wigner signs
//! `(-1)^(number of occupied modes below p)` for each ladder operator.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{Basis, StateVector};

/// `a_p |b>` as `(sign, b')`, or `None` if mode `p` is empty.
pub fn annihilate(b: u64, p: usize) -> Option<(f64, u64)> {
    if b >> p & 1 == 0 {
        return None;
    }
    Some((parity_sign(b, p), b ^ (1 << p)))
}

/// `a+_p |b>` as `(sign, b')`, or `None` if mode `p` is occupied.
pub fn create(b: u64, p: usize) -> Option<(f64, u64)> {
    if b >> p & 1 == 1 {
        return None;
    }
    Some((parity_sign(b, p), b | (1 << p)))
}

fn parity_sign(b: u64, p: usize) -> f64 {
    let below = b & ((1u64 << p) - 1);
    if below.count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

fn check_basis(psi: &StateVector, n_modes: usize) -> Result<()> {
    match psi.basis() {
        Basis::Determinant { n_modes: m } if *m == n_modes => Ok(()),
        other => Err(Error::invalid(format!(
            "RDMs need a determinant basis of {n_modes} modes, got {other:?}"
        ))),
    }
}

pub fn measure_rdm1(psi: &StateVector, n_modes: usize) -> Result<DMatrix<Complex64>> {
    check_basis(psi, n_modes)?;
    let amps = psi.amplitudes();
    let mut rho = DMatrix::zeros(n_modes, n_modes);
    for (b, a) in amps.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let b = b as u64;
        for p in 0..n_modes {
            let Some((s1, b1)) = annihilate(b, p) else { continue };
            for q in 0..n_modes {
                if let Some((s2, b2)) = create(b1, q) {
                    rho[(p, q)] += amps[b2 as usize].conj() * a * (s1 * s2);
                }
            }
        }
    }
    Ok(rho)
}

/// Dense rank-4 tensor indexed `[p][q][r][s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rdm2 {
    n: usize,
    data: Vec<Complex64>,
}

impl Rdm2 {
    fn index(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> Complex64 {
        self.data[self.index(p, q, r, s)]
    }
}

pub fn measure_rdm2(psi: &StateVector, n_modes: usize) -> Result<Rdm2> {
    check_basis(psi, n_modes)?;
    let amps = psi.amplitudes();
    let mut rdm = Rdm2 { n: n_modes, data: vec![Complex64::default(); n_modes.pow(4)] };
    for (b, a) in amps.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let b = b as u64;
        for s in 0..n_modes {
            let Some((s1, b1)) = annihilate(b, s) else { continue };
            for r in 0..n_modes {
                let Some((s2, b2)) = annihilate(b1, r) else { continue };
                for p in 0..n_modes {
                    let Some((s3, b3)) = create(b2, p) else { continue };
                    for q in 0..n_modes {
                        if let Some((s4, b4)) = create(b3, q) {
                            let idx = rdm.index(p, q, r, s);
                            rdm.data[idx] += amps[b4 as usize].conj() * a * (s1 * s2 * s3 * s4);
                        }
                    }
                }
            }
        }
    }
    Ok(rdm)
}
