use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qcat::kernels::ground_states;
use qcat::nuclear::*;
use qcat::sparse::dense_eigenvalues;
use qcat::Error;

fn harmonic_1d(points: usize, half_width: f64) -> DvrSystem {
    let ax = DvrAxis::spanning(points, -half_width, half_width, 1.0).unwrap();
    DvrSystem::from_fn(DvrGrid::new(vec![ax]).unwrap(), 1, |_, x| 0.5 * x[0] * x[0]).unwrap()
}

fn assert_same_spectrum(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < tol, "{x} vs {y}");
    }
}

#[test]
fn harmonic_oscillator_zero_point_energy() {
    let h = build_dvr_hamiltonian(&harmonic_1d(64, 8.0), 0).unwrap();
    let e = dense_eigenvalues(&h.to_dense());
    assert!((e[0] - 0.5).abs() < 1e-8, "{}", e[0]);
}

#[test]
fn separable_two_dimensional_zero_point_energy() {
    let ax = DvrAxis::spanning(32, -6.0, 6.0, 1.0).unwrap();
    let grid = DvrGrid::new(vec![ax.clone(), ax]).unwrap();
    let sys = DvrSystem::from_fn(grid, 1, |_, x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
    let h = build_dvr_hamiltonian(&sys, 0).unwrap();
    let res = ground_states(&h, 1, 1e-10).unwrap();
    assert!((res.eigenvalues[0] - 1.0).abs() < 1e-6, "{}", res.eigenvalues[0]);
}

#[test]
fn ground_energy_converges_with_grid() {
    let err = |l| {
        // Wide box so the coarse grids are spacing-limited, not roundoff-limited.
        let h = build_dvr_hamiltonian(&harmonic_1d(l, 20.0), 0).unwrap();
        (dense_eigenvalues(&h.to_dense())[0] - 0.5).abs()
    };
    let (e16, e32, e64) = (err(16), err(32), err(64));
    assert!(e64 > 1e-13, "{e64}");
    assert!(e32 < e16 && e64 < e32, "{e16} {e32} {e64}");
}

#[test]
fn kinetic_matrix_is_positive_semidefinite() {
    for (l, dx, m) in [(2, 1.0, 1.0), (8, 0.3, 2.0), (33, 0.1, 1836.0), (64, 0.25, 1.0)] {
        let t = sinc_dvr_kinetic(&DvrAxis::new(l, 0.0, dx, m).unwrap());
        let c = t.map(|v| Complex64::new(v, 0.0));
        assert!(dense_eigenvalues(&c)[0] >= -1e-10);
    }
}

#[test]
fn fifteen_dimensional_grid_is_refused_with_count() {
    let ax = DvrAxis::new(256, -1.0, 0.01, 1.0).unwrap();
    let grid = DvrGrid::new(vec![ax; 15]).unwrap();
    let err = grid.n_points().unwrap_err();
    assert!(matches!(err, Error::CapExceeded { .. }));
    assert!(err.to_string().contains("256^15"), "{err}");
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn two_point_direct_map() {
    let ax = DvrAxis::new(2, 0.0, 1.0, 1.0).unwrap();
    let sys = DvrSystem::new(DvrGrid::new(vec![ax]).unwrap(), vec![vec![0.3, -0.2]]).unwrap();
    let op = direct_map(&sys, 0).unwrap();
    assert_eq!(op.n_qubits(), 2);
    let restricted = one_hot_matrix(&op, &sys).unwrap();
    let dvr = build_dvr_hamiltonian(&sys, 0).unwrap().to_dense();
    assert_same_spectrum(&dense_eigenvalues(&restricted), &dense_eigenvalues(&dvr), 1e-12);
}

#[test]
fn four_point_binary_map() {
    let sys = harmonic_1d(4, 1.5);
    let op = binary_map(&sys, 0).unwrap();
    assert_eq!(op.n_qubits(), 2);
    let dvr = build_dvr_hamiltonian(&sys, 0).unwrap().to_dense();
    let mapped = op.to_matrix().unwrap().to_dense();
    assert!((mapped - &dvr).norm() < 1e-12);
}

/// Direct tensor-product construction of the truncated vibrational Hamiltonian.
fn vibrational_reference(vh: &VibrationalHamiltonian) -> DMatrix<f64> {
    let n = vh.truncation;
    let modes = vh.frequencies.len();
    let embed = |local: &DMatrix<f64>, mode: usize| {
        // Mode 0 on the lowest qubits, so it is the rightmost Kronecker factor.
        let mut m = DMatrix::<f64>::identity(1, 1);
        for a in (0..modes).rev() {
            let f = if a == mode { local.clone() } else { DMatrix::identity(n, n) };
            m = m.kronecker(&f);
        }
        m
    };
    let dim = n.pow(modes as u32);
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for (a, &w) in vh.frequencies.iter().enumerate() {
        let diag = DMatrix::from_fn(n, n, |i, j| if i == j { w * (i as f64 + 0.5) } else { 0.0 });
        h += embed(&diag, a);
    }
    for t in &vh.terms {
        let mut prod = DMatrix::<f64>::identity(dim, dim) * t.coefficient;
        for &(m, p) in &t.powers {
            let w = vh.frequencies[m];
            let a = DMatrix::from_fn(n, n, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 });
            let q = (&a + a.transpose()) / (2.0 * w).sqrt();
            let mut qp = DMatrix::<f64>::identity(n, n);
            for _ in 0..p {
                qp = qp * &q;
            }
            prod *= embed(&qp, m);
        }
        h += prod;
    }
    h
}

#[test]
fn uncoupled_modes_give_harmonic_ladder() {
    let vh = VibrationalHamiltonian::new(vec![1.0, 2.0], vec![], 4).unwrap();
    let op = build_vibrational_hamiltonian(&vh).unwrap();
    assert_eq!(op.n_qubits(), 4);
    let mut expected: Vec<f64> = (0..4)
        .flat_map(|a| (0..4).map(move |b| a as f64 + 0.5 + 2.0 * (b as f64 + 0.5)))
        .collect();
    expected.sort_by(f64::total_cmp);
    assert_same_spectrum(&dense_eigenvalues(&op.to_matrix().unwrap().to_dense()), &expected, 1e-12);
}

#[test]
fn anharmonic_couplings_match_tensor_construction() {
    let terms = vec![
        PotentialTerm { coefficient: 0.05, powers: vec![(0, 3)] },
        PotentialTerm { coefficient: -0.02, powers: vec![(0, 1), (1, 2)] },
        PotentialTerm { coefficient: 0.01, powers: vec![(1, 4)] },
    ];
    let vh = VibrationalHamiltonian::new(vec![1.0, 1.7], terms, 4).unwrap();
    let mapped = build_vibrational_hamiltonian(&vh).unwrap().to_matrix().unwrap().to_dense();
    let reference = vibrational_reference(&vh).map(|v| Complex64::new(v, 0.0));
    assert!((mapped - reference).norm() < 1e-12);
}

fn random_system(shape: &[usize], values: &[f64]) -> DvrSystem {
    let axes = shape
        .iter()
        .enumerate()
        .map(|(a, &l)| DvrAxis::new(l, -1.0 + a as f64, 0.4 + 0.1 * a as f64, 1.0 + a as f64).unwrap())
        .collect();
    let grid = DvrGrid::new(axes).unwrap();
    let n = grid.n_points().unwrap();
    DvrSystem::new(grid, vec![values[..n].to_vec()]).unwrap()
}

fn shapes() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        (1u32..4).prop_map(|k| vec![1 << k]),
        ((1u32..4), (1u32..4)).prop_map(|(a, b)| vec![1 << a, 1 << b]),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn binary_map_is_isospectral(shape in shapes(), values in prop::collection::vec(-2.0f64..2.0, 64)) {
        let sys = random_system(&shape, &values);
        let op = binary_map(&sys, 0).unwrap();
        prop_assert_eq!(Some(op.n_qubits()), shape.iter().map(|&l| binary_qubit_count(1, l)).sum());
        let a = dense_eigenvalues(&op.to_matrix().unwrap().to_dense());
        let b = dense_eigenvalues(&build_dvr_hamiltonian(&sys, 0).unwrap().to_dense());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn direct_map_is_isospectral_on_one_hot_states(
        shape in prop_oneof![(2usize..9).prop_map(|l| vec![l]), ((2usize..5), (2usize..5)).prop_map(|(a, b)| vec![a, b])],
        values in prop::collection::vec(-2.0f64..2.0, 64),
    ) {
        let sys = random_system(&shape, &values);
        let op = direct_map(&sys, 0).unwrap();
        prop_assert_eq!(op.n_qubits(), shape.iter().sum::<usize>());
        let a = dense_eigenvalues(&one_hot_matrix(&op, &sys).unwrap());
        let b = dense_eigenvalues(&build_dvr_hamiltonian(&sys, 0).unwrap().to_dense());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn qubit_count_formulas(m in 1usize..100, k in 1u32..10) {
        let l = 1usize << k;
        prop_assert_eq!(direct_qubit_count(m, l), m * l);
        prop_assert_eq!(binary_qubit_count(m, l), Some(m * k as usize));
    }
}
