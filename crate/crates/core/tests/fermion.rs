use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qcat::fermion::*;
use qcat::kernels::EigenOptions;
use qcat::sparse::dense_eigenvalues;
use qcat::state::{Basis, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Jordan-Wigner annihilator built from Kronecker products, qubit 0 least significant.
fn kron_annihilator(j: usize, n: usize) -> DMatrix<Complex64> {
    let id = DMatrix::<Complex64>::identity(2, 2);
    let z = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    let lower = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
    let mut m = DMatrix::<Complex64>::identity(1, 1);
    for q in 0..n {
        let f = if q < j {
            &z
        } else if q == j {
            &lower
        } else {
            &id
        };
        m = f.kronecker(&m);
    }
    m
}

fn dense_hamiltonian(h: &MolecularHamiltonian) -> DMatrix<Complex64> {
    let n = h.n_spin_orbitals;
    let a: Vec<_> = (0..n).map(|j| kron_annihilator(j, n)).collect();
    let ad: Vec<_> = a.iter().map(|m| m.adjoint()).collect();
    let mut out = DMatrix::<Complex64>::identity(1 << n, 1 << n) * c(h.core_energy);
    for p in 0..n {
        for q in 0..n {
            out += &ad[p] * &a[q] * c(h.h1[(p, q)]);
        }
    }
    for (&[p, q, r, s], &v) in &h.h2 {
        out += &ad[p] * &ad[q] * &a[r] * &a[s] * c(0.5 * v);
    }
    out
}

fn random_integrals(norb: usize, nelec: usize, seed: u64) -> IntegralFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = IntegralFile::new(norb, nelec, 0);
    f.core_energy = rng.random_range(-1.0..1.0);
    for i in 0..norb {
        for j in 0..=i {
            f.set_one_body(i, j, rng.random_range(-1.0..1.0));
        }
    }
    for i in 0..norb {
        for j in 0..norb {
            for k in 0..norb {
                for l in 0..norb {
                    if f.eri(i, j, k, l) == 0.0 {
                        f.set_two_body(i, j, k, l, rng.random_range(-0.5..0.5));
                    }
                }
            }
        }
    }
    f
}

#[test]
fn jordan_wigner_matches_kronecker_construction() {
    let h = MolecularHamiltonian::from_integrals(&random_integrals(2, 2, 7)).unwrap();
    let mapped = h.to_qubit_operator(Encoding::JordanWigner).unwrap().to_matrix().unwrap().to_dense();
    let expected = dense_hamiltonian(&h);
    assert!((mapped - expected).camax() < 1e-12);
}

#[test]
fn other_encodings_are_basis_relabelings() {
    // H_enc[B n, B m] = H_JW[n, m] with B the encoding's binary matrix.
    for seed in 0..3 {
        let h = MolecularHamiltonian::from_integrals(&random_integrals(3, 2, seed)).unwrap();
        let jw = h.to_qubit_operator(Encoding::JordanWigner).unwrap().to_matrix().unwrap().to_dense();
        for enc in [Encoding::BravyiKitaev, Encoding::Parity] {
            let b = enc.matrix(6);
            let m = h.to_qubit_operator(enc).unwrap().to_matrix().unwrap().to_dense();
            for n in 0..64u64 {
                for k in 0..64u64 {
                    let diff = m[(b.apply(n) as usize, b.apply(k) as usize)] - jw[(n as usize, k as usize)];
                    assert!(diff.norm() < 1e-12, "{enc} seed {seed}");
                }
            }
        }
    }
}

#[test]
fn encodings_are_isospectral() {
    let h = MolecularHamiltonian::hubbard_dimer(1.0, 8.0);
    let spectra: Vec<Vec<f64>> = Encoding::ALL
        .iter()
        .map(|&e| dense_eigenvalues(&h.to_qubit_operator(e).unwrap().to_matrix().unwrap().to_dense()))
        .collect();
    for s in &spectra[1..] {
        for (a, b) in s.iter().zip(&spectra[0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn hubbard_dimer_ground_energy_in_every_encoding() {
    let h = MolecularHamiltonian::hubbard_dimer(1.0, 8.0);
    for enc in Encoding::ALL {
        let g = sector_ground_state_encoded(&h, 2, enc, &EigenOptions::new(1, 1e-10), None).unwrap();
        assert!((g.energy + 0.472136).abs() < 1e-6, "{enc}: {}", g.energy);
    }
}

#[test]
fn rdm_energy_reproduces_eigenvalue() {
    let h = MolecularHamiltonian::from_integrals(&random_integrals(3, 4, 11)).unwrap();
    let g = sector_ground_state(&h, 4, &EigenOptions::new(1, 1e-10), None).unwrap();
    let (r1, r2) = state_rdms(&g.state, 6).unwrap();
    assert!((h.energy_from_rdms(&r1, &r2) - g.energy).abs() < 1e-9);
    let dense = dense_hamiltonian(&h);
    let psi = DMatrix::from_column_slice(64, 1, g.state.amplitudes());
    let direct = (psi.adjoint() * dense * &psi)[(0, 0)].re;
    assert!((direct - g.energy).abs() < 1e-9);
}

#[test]
fn frozen_core_energy_matches_embedded_expectation() {
    // For any active-space state psi, <core x psi|H|core x psi> = <psi|H_reduced|psi>.
    let f = random_integrals(3, 4, 23);
    let h = MolecularHamiltonian::from_integrals(&f).unwrap();
    let space = ActiveSpace::new(vec![1, 2], vec![0], 2).unwrap();
    let (reduced, space) = freeze_reduce(&h, &space).unwrap();
    assert_eq!(reduced.n_spin_orbitals, 4);
    assert!(reduced.is_hermitian(1e-12));
    assert!(space.frozen_core_shift != 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut small = vec![Complex64::default(); 16];
    for (b, a) in small.iter_mut().enumerate() {
        if (b as u32).count_ones() == 2 {
            *a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    let psi = StateVector::new(Basis::Determinant { n_modes: 4 }, small).unwrap();
    let mut big = vec![Complex64::default(); 64];
    for (b, a) in psi.amplitudes().iter().enumerate() {
        big[0b11 | (b << 2)] = *a;
    }
    let reduced_m = reduced.to_qubit_operator(Encoding::JordanWigner).unwrap().to_matrix().unwrap();
    let full_m = h.to_qubit_operator(Encoding::JordanWigner).unwrap().to_matrix().unwrap();
    let e_small = psi.expectation(&reduced_m).unwrap().re;
    let e_big = StateVector::new(Basis::Determinant { n_modes: 6 }, big).unwrap().expectation(&full_m).unwrap().re;
    assert!((e_small - e_big).abs() < 1e-12, "{e_small} vs {e_big}");
}

#[test]
fn fcidump_roundtrip_preserves_hamiltonian() {
    let f = random_integrals(2, 2, 3);
    let g = IntegralFile::parse(&f.to_text()).unwrap();
    let a = MolecularHamiltonian::from_integrals(&f).unwrap();
    let b = MolecularHamiltonian::from_integrals(&g).unwrap();
    assert!((&a.h1 - &b.h1).amax() < 1e-15);
    for (k, v) in &a.h2 {
        assert!((v - b.h2[k]).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mapped_hamiltonians_are_hermitian(seed in 0u64..1000, enc in 0usize..3) {
        let h = MolecularHamiltonian::from_integrals(&random_integrals(2, 2, seed)).unwrap();
        let op = h.to_qubit_operator(Encoding::ALL[enc]).unwrap();
        prop_assert!(op.is_hermitian(1e-12));
        for (_, coef) in op.iter() {
            prop_assert!(coef.im.abs() < 1e-12);
        }
    }

    #[test]
    fn number_operator_counts_particles(occ in 0u64..256, enc in 0usize..3) {
        let e = FermionEncoder::new(Encoding::ALL[enc], 8);
        let n = e.number_operator().unwrap();
        let state = StateVector::basis_state(Basis::Qubit { n_qubits: 8 }, e.encode_occupation(occ) as usize).unwrap();
        let value = qcat::op_expectation(&n, &state).unwrap().re;
        prop_assert!((value - occ.count_ones() as f64).abs() < 1e-12);
    }

    #[test]
    fn ladder_operators_anticommute(p in 0usize..5, q in 0usize..5, enc in 0usize..3) {
        let e = FermionEncoder::new(Encoding::ALL[enc], 5);
        let a = e.ladder(Ladder::annihilate(p)).unwrap();
        let ad = e.ladder(Ladder::create(q)).unwrap();
        let mut anti = a.multiply(ad).unwrap();
        for (s, coef) in ad.multiply(a).unwrap().iter() {
            anti.add_term(s.clone(), *coef).unwrap();
        }
        anti.simplify(1e-12);
        if p == q {
            prop_assert_eq!(anti.num_terms(), 1);
            prop_assert!((anti.coefficient(&qcat::PauliString::identity(5)) - c(1.0)).norm() < 1e-12);
        } else {
            prop_assert!(anti.is_empty());
        }
    }
}
