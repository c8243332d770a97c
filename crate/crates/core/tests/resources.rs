use proptest::prelude::*;
use qcat::pauli::{PauliOperator, PauliString};
use qcat::resources::*;

/// Binomial coefficients from Pascal's triangle in u128.
fn pascal(n: usize, k: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![1u128; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row[k]
}

#[test]
fn electronic_qubit_counts() {
    assert_eq!(qubit_count(QubitKind::JordanWigner { orbitals: 32, electrons: 48 }).unwrap(), 64);
    assert_eq!(qubit_count(QubitKind::JordanWigner { orbitals: 35, electrons: 45 }).unwrap(), 70);
    assert!(qubit_count(QubitKind::JordanWigner { orbitals: 2, electrons: 5 }).is_err());
}

#[test]
fn grid_qubit_counts() {
    assert_eq!(qubit_count(QubitKind::DvrDirect { dims: 15, points: 256 }).unwrap(), 3840);
    assert_eq!(qubit_count(QubitKind::DvrBinary { dims: 15, points: 256 }).unwrap(), 120);
    assert_eq!(qubit_count(QubitKind::DvrBinary { dims: 90, points: 256 }).unwrap(), 720);
    assert_eq!(qubit_count(QubitKind::BosonBinary { modes: 3, levels: 8 }).unwrap(), 9);
    assert!(matches!(qubit_count(QubitKind::DvrBinary { dims: 2, points: 100 }), Err(qcat::Error::NotPowerOfTwo(100))));
    assert!(qubit_count(QubitKind::BosonBinary { modes: 0, levels: 8 }).is_err());
}

#[test]
fn fci_dimension_exact() {
    let c = pascal(32, 24);
    assert_eq!(c, 10_518_300);
    let d = fci_dimension(24, 24, 32).unwrap();
    assert_eq!(d.to_string(), (c * c).to_string());
    let approx: f64 = d.to_string().parse().unwrap();
    assert!((approx / 1.1063e14 - 1.0).abs() < 1e-4);
    assert_eq!(fci_dimension(1, 0, 2).unwrap().to_string(), "2");
    assert_eq!(fci_dimension(7, 7, 7).unwrap().to_string(), "1");
    assert!(fci_dimension(3, 1, 2).is_err());
}

#[test]
fn dmrg_scale_and_memory() {
    let c = dmrg_cost(64, 5000, 16).unwrap();
    assert_eq!(c.scale, 8_000_000_000_000);
    assert_eq!(c.memory_bytes, 128_000_000_000_000);
    assert_eq!(dmrg_cost(64, 1, 16).unwrap().scale, 64);
    assert!(dmrg_cost(0, 1, 16).is_err());
}

fn op(n: usize, terms: &[(&str, f64)]) -> PauliOperator {
    PauliOperator::from_labels(n, terms).unwrap()
}

#[test]
fn trotter_gate_counts() {
    let z = trotter_step_gates(&op(1, &[("Z0", 1.0)])).unwrap();
    assert_eq!((z.two_qubit_gates, z.rotations), (0, 1));
    let zz = trotter_step_gates(&op(2, &[("Z0 Z1", 1.0)])).unwrap();
    assert_eq!(zz.two_qubit_gates, 2);
    let heis = trotter_step_gates(&op(2, &[("X0 X1", 1.0), ("Y0 Y1", 1.0), ("Z0 Z1", 1.0)])).unwrap();
    assert_eq!((heis.two_qubit_gates, heis.rotations), (6, 3));
    assert!(trotter_step_gates(&PauliOperator::zero(3)).is_err());
}

#[test]
fn report_histogram_sums_to_terms() {
    let h = op(3, &[("I", 0.5), ("Z0", 1.0), ("X0 X1", 1.0), ("Z0 Z1 Z2", 0.1)]);
    let r = ResourceReport::new("jordan_wigner", &h, None).unwrap();
    assert_eq!(r.weight_histogram, vec![1, 1, 1, 1]);
    assert_eq!(r.weight_histogram.iter().sum::<usize>(), r.n_terms);
    assert_eq!(r.trotter_step, TrotterCost { two_qubit_gates: 6, rotations: 3 });
}

#[test]
fn summary_qubit_columns() {
    let s = requirements_summary().unwrap();
    let q: Vec<(usize, usize)> = s.rows.iter().map(|r| (r.qubits_minimum, r.qubits_target)).collect();
    assert_eq!(q, [(64, 650), (64, 650), (120, 720)]);
    assert_eq!(s.classical.fci_dimension, "110634634890000");
    let json = serde_json::to_string(&s).unwrap();
    let back: RequirementsSummary = serde_json::from_str(&json).unwrap();
    assert_eq!(back, s);
}

fn arb_strings(n: usize) -> impl Strategy<Value = Vec<PauliString>> {
    prop::collection::vec(prop::collection::vec(0u8..4, n), 1..12).prop_map(move |rows| {
        rows.iter()
            .map(|letters| {
                let label: Vec<String> = letters
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| **l > 0)
                    .map(|(q, l)| format!("{}{q}", ["I", "X", "Y", "Z"][*l as usize]))
                    .collect();
                PauliString::parse(n, &label.join(" ")).unwrap()
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn binary_grid_is_cheaper_than_one_hot(dims in 1usize..100, k in 1u32..16) {
        let points = 1usize << k;
        let binary = qubit_count(QubitKind::DvrBinary { dims, points }).unwrap();
        let direct = qubit_count(QubitKind::DvrDirect { dims, points }).unwrap();
        prop_assert!(binary < direct);
    }

    #[test]
    fn fci_dimension_is_symmetric(n in 1u64..40, a in 0u64..40, b in 0u64..40) {
        prop_assume!(a <= n && b <= n);
        prop_assert_eq!(fci_dimension(a, b, n).unwrap(), fci_dimension(b, a, n).unwrap());
        let expected = pascal(n as usize, a as usize) * pascal(n as usize, b as usize);
        prop_assert_eq!(fci_dimension(a, b, n).unwrap().to_string(), expected.to_string());
    }

    #[test]
    fn gate_count_is_additive(a in arb_strings(5), b in arb_strings(5)) {
        let joined: Vec<PauliString> = a.iter().chain(&b).cloned().collect();
        prop_assert_eq!(trotter_cost_of_terms(&joined), trotter_cost_of_terms(&a) + trotter_cost_of_terms(&b));
    }
}
