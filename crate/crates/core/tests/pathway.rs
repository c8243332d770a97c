use qcat::fermion::{Encoding, IntegralFile, MolecularHamiltonian};
use qcat::pathway::*;

const U: f64 = 4.0;

fn hopping(r: f64) -> f64 {
    (-r).exp()
}

/// Hubbard dimer at bond length `r` as an integral file; hopping enters as h01 = -t.
fn dimer_file(r: f64, shift: f64) -> IntegralFile {
    let mut f = IntegralFile::new(2, 2, 0);
    f.core_energy = shift;
    f.set_one_body(0, 1, -hopping(r));
    f.set_two_body(0, 0, 0, 0, U);
    f.set_two_body(1, 1, 1, 1, U);
    f
}

#[test]
fn hubbard_family_barrier_matches_brute_force() {
    let rs = [("R", 0.6), ("TS1", 1.4), ("TS2", 2.2), ("P", 1.0)];
    let stations: Vec<PathwayStation> = rs
        .iter()
        .map(|&(label, r)| {
            let h = MolecularHamiltonian::from_integrals(&dimer_file(r, 0.0)).unwrap();
            let (e, tau) = station_energy(&h, Encoding::BravyiKitaev, 1e-10).unwrap();
            PathwayStation::new(label, e, tau)
        })
        .collect();
    let exact = |r: f64| MolecularHamiltonian::hubbard_dimer_ground_energy(hopping(r), U);
    let brute = [1.4, 2.2].iter().map(|&r| exact(r) - exact(0.6)).fold(f64::MIN, f64::max);
    assert!((activation_energy(&stations).unwrap() - brute).abs() < 1e-8);
    assert!(activation_uncertainty(&stations) >= 2e-10);
}

#[test]
fn barrier_is_shift_invariant() {
    let p = |shift: f64| {
        vec![PathwayStation::new("R", -1.3 + shift, 1e-8), PathwayStation::new("TS1", -1.1 + shift, 1e-8), PathwayStation::new("P", -1.5 + shift, 1e-8)]
    };
    let a = activation_energy(&p(0.0)).unwrap();
    for shift in [-100.0, -0.25, 3.0, 1e3] {
        assert!((activation_energy(&p(shift)).unwrap() - a).abs() < 1e-10);
    }
}

fn report(id: &str, ea: f64) -> CatalystReport {
    let stations = vec![PathwayStation::new("R", 0.0, 1e-8), PathwayStation::new("TS1", ea, 1e-8)];
    CatalystReport::new(id, vec![PathwayResult::from_stations("p1", stations).unwrap()]).unwrap()
}

fn order(reports: &[CatalystReport]) -> Vec<String> {
    reports.iter().map(|r| r.catalyst_id.clone()).collect()
}

#[test]
fn ranking_rules() {
    let ranked = rank_catalysts(vec![report("A", 0.5), report("B", 0.2)], 300.0).unwrap();
    assert_eq!(order(&ranked), ["B", "A"]);
    let ranked = rank_catalysts(vec![report("Z", 0.3), report("M", 0.3)], 300.0).unwrap();
    assert_eq!(order(&ranked), ["M", "Z"]);
    assert_eq!(ranked[0].unresolved_with, ["Z"]);
    assert!(rank_catalysts(vec![], 300.0).is_err());
}

#[test]
fn ranking_is_invariant_under_monotone_transforms() {
    let eas = [("c1", 0.031), ("c2", 0.012), ("c3", 0.027), ("c4", 0.019)];
    let base = order(&rank_catalysts(eas.iter().map(|&(id, e)| report(id, e)).collect(), 300.0).unwrap());
    let transforms: [fn(f64) -> f64; 3] = [|x| 3.0 * x + 0.1, |x| x.powi(3), |x| (x * 10.0).exp()];
    for f in transforms {
        let ranked = rank_catalysts(eas.iter().map(|&(id, e)| report(id, f(e))).collect(), 300.0).unwrap();
        assert_eq!(order(&ranked), base);
    }
}

#[test]
fn arrhenius_relations() {
    assert_eq!(arrhenius_factor(0.0, 10.0).unwrap(), 1.0);
    let ratio = arrhenius_factor(0.01, 300.0).unwrap() / arrhenius_factor(0.02, 300.0).unwrap();
    assert!((ratio / (0.01 / (BOLTZMANN_HARTREE_PER_K * 300.0)).exp() - 1.0).abs() < 1e-12);
    let scan: Vec<f64> = (1..=10).map(|k| arrhenius_factor(0.01, 100.0 * k as f64).unwrap()).collect();
    assert!(scan.windows(2).all(|w| w[1] > w[0]));
    assert!(arrhenius_factor(0.01, 0.0).is_err());
}

#[test]
fn manifest_run_ranks_catalysts() {
    let dir = tempfile::tempdir().unwrap();
    // Catalyst "fast" is the Hubbard family; "slow" is the same with a stiffer barrier
    // station and a uniform core shift that must not matter.
    let geometries = [("fast", 0.0, [0.6, 1.4, 1.0]), ("slow", -7.5, [0.6, 2.5, 1.0])];
    let mut catalysts = vec![];
    for (id, shift, rs) in geometries {
        let mut stations = vec![];
        for (label, r) in ["R", "TS1", "P"].iter().zip(rs) {
            let name = format!("{id}_{label}.fcidump");
            std::fs::write(dir.path().join(&name), dimer_file(r, shift).to_text()).unwrap();
            stations.push(serde_json::json!({"label": label, "integrals": name}));
        }
        catalysts.push(serde_json::json!({"id": id, "pathways": [{"id": "main", "stations": stations}]}));
    }
    let manifest = serde_json::json!({"temperature": 500.0, "encoding": "parity", "catalysts": catalysts});
    let path = dir.path().join("manifest.json");
    std::fs::write(&path, manifest.to_string()).unwrap();
    let reports = run_pathways(&PathwayManifest::read(&path).unwrap(), dir.path()).unwrap();
    assert_eq!(order(&reports), ["fast", "slow"]);
    let exact = |r: f64| MolecularHamiltonian::hubbard_dimer_ground_energy(hopping(r), U);
    assert!((reports[0].activation_energy - (exact(1.4) - exact(0.6))).abs() < 1e-8);
    assert!((reports[1].activation_energy - (exact(2.5) - exact(0.6))).abs() < 1e-8);
    assert_eq!(reports[0].relative_rate, Some(1.0));
    assert!(reports[1].relative_rate.unwrap() < 1.0);
    let csv = reports_to_csv(&reports).unwrap();
    assert_eq!(csv.lines().count(), 3);
}
