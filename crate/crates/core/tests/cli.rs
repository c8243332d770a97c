mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use qcat::fermion::{IntegralFile, MolecularHamiltonian};
use qcat::nuclear::{DvrAxis, DvrGrid, DvrSystem};
use qcat::workflow::{ingest_fcidump, ingest_pes, RunManifest};
use qcat::PauliOperator;
use serde_json::{json, Value};

fn qcat(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcat")).current_dir(cwd).args(args).output().unwrap()
}

fn qcat_env(cwd: &Path, args: &[&str], env: (&str, &str)) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcat")).current_dir(cwd).args(args).env(env.0, env.1).output().unwrap()
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn stderr_error(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().rev().find(|l| l.starts_with("{\"error\"")).unwrap_or_else(|| panic!("no error JSON in {text}"));
    serde_json::from_str(line).unwrap()
}

fn dimer_fcidump(t: f64, u: f64) -> String {
    let mut f = IntegralFile::new(2, 2, 0);
    f.set_one_body(0, 1, -t);
    f.set_two_body(0, 0, 0, 0, u);
    f.set_two_body(1, 1, 1, 1, u);
    f.to_text()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read(p: PathBuf) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn encode_writes_operator_and_report() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "dimer.fcidump", &dimer_fcidump(1.0, 4.0));
    let out = qcat(dir.path(), &["encode", "--fcidump", "dimer.fcidump", "--mapping", "jw", "--out", "run"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("run");
    let text = read(run.join("operator.txt"));
    assert_eq!(PauliOperator::from_text(&text).unwrap().to_text(), text);
    let report: Value = serde_json::from_str(&read(run.join("resources.json"))).unwrap();
    assert_eq!(report["n_qubits"], 4);
    assert_eq!(report["classical"]["fci_dimension"], "4");
    let hist: u64 = report["weight_histogram"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(hist, report["n_terms"].as_u64().unwrap());
    let m = manifest(&run);
    assert_eq!(m.status, "ok");
    assert_eq!(m.outputs, ["operator.txt", "resources.json"]);
}

#[test]
fn eigensolve_matches_closed_form_in_every_mapping() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "dimer.fcidump", &dimer_fcidump(1.0, 4.0));
    let exact = MolecularHamiltonian::hubbard_dimer_ground_energy(1.0, 4.0);
    for mapping in ["jw", "bk", "parity"] {
        let out = qcat(dir.path(), &["eigensolve", "--fcidump", "dimer.fcidump", "--mapping", mapping, "--tol", "1e-10", "--out", mapping]);
        assert!(out.status.success());
        let e: Value = serde_json::from_str(&read(dir.path().join(mapping).join("eigen.json"))).unwrap();
        assert!((e["energies"][0].as_f64().unwrap() - exact).abs() < 1e-9);
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcat(dir.path(), &["encode", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(stderr_error(&out)["error"]["kind"], "usage");
    let out = qcat(dir.path(), &["teleport"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_fcidump_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = dimer_fcidump(1.0, 4.0);
    text.push_str("  1.0 x 1 1 1\n");
    write(dir.path(), "bad.fcidump", &text);
    let out = qcat(dir.path(), &["encode", "--fcidump", "bad.fcidump", "--out", "run"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_error(&out);
    assert_eq!(err["error"]["kind"], "parse");
    assert!(err["error"]["message"].as_str().unwrap().contains("line"), "{err}");
    let m = manifest(&dir.path().join("run"));
    assert_eq!(m.status, "error");
    assert_eq!(m.error.unwrap().exit_code, 2);
}

#[test]
fn pes_row_count_mismatch_names_expected_count() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "short.pes", "dims=2\naxis 0: 4 -1 0.5 1\naxis 1: 3 -1 0.5 1\nsurfaces=1\n0\n0\n0\n");
    let out = qcat(dir.path(), &["eigensolve", "--pes", "short.pes", "--out", "run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_error(&out)["error"]["message"].as_str().unwrap().contains("expected 12"));
}

#[test]
fn oversized_operator_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "big.txt", "nqubits=30\n1.0000000000000000e0 0.0000000000000000e0 Z29\n");
    let out = qcat(dir.path(), &["eigensolve", "--operator", "big.txt", "--out", "run"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_error(&out)["error"]["kind"], "cap_exceeded");
    assert_eq!(manifest(&dir.path().join("run")).status, "error");

    write(dir.path(), "small.txt", "nqubits=3\n1.0000000000000000e0 0.0000000000000000e0 Z2\n");
    let ok = qcat(dir.path(), &["eigensolve", "--operator", "small.txt", "--out", "ok"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let capped = qcat_env(dir.path(), &["eigensolve", "--operator", "small.txt", "--out", "capped"], ("QCAT_MAX_QUBITS", "2"));
    assert_eq!(capped.status.code(), Some(4));
}

#[test]
fn grid_cap_override_refuses_large_pes() {
    let dir = tempfile::tempdir().unwrap();
    let ax = DvrAxis::spanning(16, -4.0, 4.0, 1.0).unwrap();
    let sys = DvrSystem::from_fn(DvrGrid::new(vec![ax.clone(), ax]).unwrap(), 1, |_, x| 0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
    write(dir.path(), "ho.pes", &sys.to_text());
    let out = qcat_env(dir.path(), &["eigensolve", "--pes", "ho.pes", "--out", "run"], ("QCAT_MAX_GRID", "100"));
    assert_eq!(out.status.code(), Some(4));
    let out = qcat(dir.path(), &["eigensolve", "--pes", "ho.pes", "--out", "run"]);
    assert!(out.status.success());
}

fn eckart_inputs(dir: &Path, steps: usize) {
    write(dir, "eckart.pes", &common::eckart_system(0.4).to_text());
    write(dir, "run.json", &serde_json::to_string(&common::eckart_config(steps)).unwrap());
}

#[test]
fn nqd_run_is_reproducible_from_its_manifest() {
    let dir = tempfile::tempdir().unwrap();
    eckart_inputs(dir.path(), 100);
    let out = qcat(dir.path(), &["nqd", "--pes", "eckart.pes", "--config", "run.json", "--out", "first"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = dir.path().join("first");
    let csv = read(first.join("timeseries.csv"));
    assert_eq!(csv.lines().count(), 102);
    let summary: Value = serde_json::from_str(&read(first.join("summary.json"))).unwrap();
    assert!(summary["k"].as_f64().unwrap() > 0.0);
    let m = manifest(&first);
    assert_eq!(m.config["files"]["nqd"]["steps"], 100);
    // replay the recorded argv into a new directory
    let mut argv: Vec<String> = m.argv.clone();
    let pos = argv.iter().position(|a| a == "--out").unwrap();
    argv[pos + 1] = "second".into();
    let args: Vec<&str> = argv.iter().map(String::as_str).collect();
    assert!(qcat(dir.path(), &args).status.success());
    let second = dir.path().join("second");
    for name in ["timeseries.csv", "summary.json"] {
        assert_eq!(read(first.join(name)), read(second.join(name)), "{name}");
    }
}

#[test]
fn boundary_leak_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    eckart_inputs(dir.path(), 100);
    let mut config = common::eckart_config(100);
    config.dt = 1.0;
    write(dir.path(), "long.json", &serde_json::to_string(&config).unwrap());
    let out = qcat(dir.path(), &["nqd", "--pes", "eckart.pes", "--config", "long.json", "--out", "run"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_error(&out)["error"]["kind"], "boundary_leak");
    assert_eq!(manifest(&dir.path().join("run")).status, "error");
}

fn qmd_config(seed: u64) -> Value {
    json!({
        "family": {"kind": "hubbard_dimer", "t0": 1.0, "alpha": 1.0, "u": 2.0, "z": 1.0},
        "masses": [100.0],
        "temperature": 300.0,
        "count": 6,
        "seed": seed,
        "dt": 0.2,
        "t_max": 40.0,
        "initial": {"kind": "gaussian", "mean": [1.0], "std": [0.05]},
        "predicate": {"coordinate": 0, "threshold": 3.0, "direction": "above"},
        "dump_trajectories": true
    })
}

#[test]
fn qmd_ensemble_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "qmd.json", &qmd_config(5).to_string());
    for name in ["a", "b"] {
        let out = qcat(dir.path(), &["qmd", "--config", "qmd.json", "--out", name]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(read(a.join("summary.json")), read(b.join("summary.json")));
    assert_eq!(read(a.join("trajectories/traj_00003.csv")), read(b.join("trajectories/traj_00003.csv")));
    let s: Value = serde_json::from_str(&read(a.join("summary.json"))).unwrap();
    assert_eq!(s["yield"], 1.0);
    assert_eq!(s["seed"], 5);
    assert_eq!(manifest(&a).seed, 5);
}

#[test]
fn pathway_subcommand_ranks_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut stations = vec![];
    for (label, t) in [("R", 0.6), ("TS1", 0.2), ("P", 0.4)] {
        let name = format!("{label}.fcidump");
        write(dir.path(), &name, &dimer_fcidump(t, 4.0));
        stations.push(json!({"label": label, "integrals": name}));
    }
    let manifest_json = json!({"catalysts": [
        {"id": "hub", "pathways": [{"id": "p", "stations": stations}]},
        {"id": "tabulated", "pathways": [{"id": "q", "stations": [{"label": "R", "energy": 0.0}, {"label": "TS1", "energy": 0.5}]}]}
    ]});
    write(dir.path(), "pathways.json", &manifest_json.to_string());
    let out = qcat(dir.path(), &["pathway", "--manifest", "pathways.json", "--out", "run"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path().join("run/report.csv"));
    let rows: Vec<&str> = csv.lines().collect();
    assert!(rows[1].starts_with("1,hub,"));
    assert!(rows[2].starts_with("2,tabulated,"));
}

#[test]
fn resources_table_formats() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcat(dir.path(), &["resources", "--format", "json", "--out", "run"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"][2]["qubits_target"], 720);
    assert!(read(dir.path().join("run/requirements.md")).contains("| 120 / 720 |"));
}

#[test]
fn nothing_is_written_outside_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "dimer.fcidump", &dimer_fcidump(1.0, 4.0));
    write(dir.path(), "qmd.json", &qmd_config(1).to_string());
    let before: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    for args in [
        vec!["encode", "--fcidump", "dimer.fcidump", "--out", "out"],
        vec!["eigensolve", "--fcidump", "dimer.fcidump", "--out", "out"],
        vec!["qmd", "--config", "qmd.json", "--out", "out"],
        vec!["resources", "--out", "out"],
    ] {
        assert!(qcat(dir.path(), &args).status.success());
    }
    let mut after: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    after.retain(|n| n != "out");
    let mut before = before;
    before.sort();
    after.sort();
    assert_eq!(before, after);
}

fn arb_pes() -> impl Strategy<Value = DvrSystem> {
    (1usize..3, 2usize..5, 1usize..3, any::<u64>()).prop_map(|(dims, points, surfaces, seed)| {
        let axes = (0..dims).map(|a| DvrAxis::new(points, -1.5 + a as f64 * 0.3, 0.37, 1.0 + a as f64).unwrap()).collect();
        let mut sys = DvrSystem::from_fn(DvrGrid::new(axes).unwrap(), surfaces, |s, x| {
            (seed as f64 * 1e-19 + s as f64 + x.iter().sum::<f64>()).sin() * 1e-3
        })
        .unwrap();
        if surfaces > 1 {
            let n = sys.n_points();
            sys.set_coupling(0, 1, (0..n).map(|g| 0.01 * g as f64 - 0.003).collect()).unwrap();
        }
        sys
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pes_ingest_round_trip(sys in arb_pes()) {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "s.pes", &sys.to_text());
        prop_assert_eq!(ingest_pes(&path).unwrap(), sys);
    }

    #[test]
    fn fcidump_ingest_round_trip(t in -2.0f64..2.0, u in 0.0f64..8.0, core in -5.0f64..5.0) {
        let mut f = IntegralFile::new(2, 2, 0);
        f.core_energy = core;
        f.set_one_body(0, 1, t);
        f.set_two_body(0, 0, 1, 1, u);
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "f.fcidump", &f.to_text());
        let (back, _) = ingest_fcidump(&path, None).unwrap();
        prop_assert_eq!(back, f);
    }
}
