//! Command-line orchestration: argument parsing, file ingestion, output
//! directories and run manifests.
//!
//! Every run writes `manifest.json` into its output directory, on success and
//! on failure. Numeric outputs depend only on the inputs and seeds; the
//! manifest's `timings` block is the only wall-clock data written.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{read_text, Error, Result};
use crate::fermion::{freeze_reduce, sector_ground_state_encoded, select_active_space, Encoding, IntegralFile, MolecularHamiltonian};
use crate::kernels::{ground_states_with, EigenOptions, DEFAULT_EIGEN_TOL, LANCZOS_SEED};
use crate::nqd::{run_nqd, NqdConfig};
use crate::nuclear::{binary_map, direct_map, DvrOperator, DvrSystem};
use crate::pathway::{reports_to_csv, run_pathways, PathwayManifest};
use crate::pauli::{PauliOperator, DEFAULT_DROP_THRESHOLD};
use crate::qmd::{
    run_ensemble, sample_initial_conditions, yield_and_rate, HubbardDimerFamily, IntegralDirectoryFamily, ParameterizedHamiltonian, PositionSpec,
    ProductPredicate, TrajectoryOptions, AU_TIME_PER_FS,
};
use crate::resources::{requirements_summary, ClassicalComparators, ResourceReport, DEFAULT_BYTES_PER_AMPLITUDE};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser, Serialize)]
#[command(name = "qcat", version, about = "Hamiltonian encodings and desk-scale catalysis workflows")]
pub struct Cli {
    /// Output directory; created if missing. Nothing is written outside it.
    #[arg(long, global = true, default_value = "qcat-out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case", tag = "subcommand")]
pub enum Command {
    /// Map an FCIDUMP or PES file to a Pauli operator and report its resources.
    Encode(EncodeArgs),
    /// Ground state(s) of an FCIDUMP, Pauli operator or PES file.
    Eigensolve(EigensolveArgs),
    /// Activation energies and catalyst ranking from a pathway manifest.
    Pathway(PathwayArgs),
    /// Born-Oppenheimer trajectory ensemble, yield and rate.
    Qmd(QmdArgs),
    /// Wavepacket propagation with product probability and flux.
    Nqd(NqdArgs),
    /// Requirements summary table, or statistics of a Pauli operator file.
    Resources(ResourcesArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMap {
    Binary,
    Direct,
}

#[derive(Debug, Args, Serialize)]
pub struct EncodeArgs {
    #[arg(long, conflicts_with = "pes", required_unless_present = "pes")]
    pub fcidump: Option<PathBuf>,
    #[arg(long)]
    pub pes: Option<PathBuf>,
    /// Fermion encoding: jw, bk or parity.
    #[arg(long, default_value = "jw")]
    pub mapping: String,
    /// Grid encoding for PES input.
    #[arg(long, value_enum, default_value = "binary")]
    pub grid_map: GridMap,
    #[arg(long, default_value_t = 0)]
    pub surface: usize,
    /// Active-space energy window center (Hartree); needs orbital energies.
    #[arg(long, requires = "window")]
    pub fermi: Option<f64>,
    /// Active-space energy window half width (Hartree).
    #[arg(long, requires = "fermi")]
    pub window: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_DROP_THRESHOLD)]
    pub threshold: f64,
    /// DMRG bond dimension for the classical comparator.
    #[arg(long, default_value_t = 5000)]
    pub bond_dimension: u64,
    #[arg(long, default_value_t = DEFAULT_BYTES_PER_AMPLITUDE)]
    pub bytes_per_amplitude: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct EigensolveArgs {
    #[arg(long, group = "source", required = true)]
    pub fcidump: Option<PathBuf>,
    #[arg(long, group = "source")]
    pub operator: Option<PathBuf>,
    #[arg(long, group = "source")]
    pub pes: Option<PathBuf>,
    #[arg(long, default_value = "jw")]
    pub mapping: String,
    #[arg(long, default_value_t = DEFAULT_EIGEN_TOL)]
    pub tol: f64,
    /// Number of lowest states (operator and PES input).
    #[arg(long, default_value_t = 1)]
    pub states: usize,
    #[arg(long, requires = "window")]
    pub fermi: Option<f64>,
    #[arg(long, requires = "fermi")]
    pub window: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct PathwayArgs {
    /// Pathway manifest; integral paths are relative to its directory.
    #[arg(long)]
    pub manifest: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct QmdArgs {
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct NqdArgs {
    #[arg(long)]
    pub pes: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    Markdown,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct ResourcesArgs {
    #[arg(long, value_enum, default_value = "markdown")]
    pub format: TableFormat,
    /// Report statistics of this Pauli operator file instead of the table.
    #[arg(long)]
    pub operator: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FamilySpec {
    HubbardDimer(HubbardDimerFamily),
    /// Directory with `index.json`, relative to the config file.
    IntegralDirectory { path: PathBuf },
}

fn default_count() -> usize {
    100
}

fn default_dt() -> f64 {
    AU_TIME_PER_FS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QmdConfig {
    pub family: FamilySpec,
    pub masses: Vec<f64>,
    pub temperature: f64,
    #[serde(default = "default_count")]
    pub count: usize,
    pub seed: u64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_max: f64,
    pub initial: PositionSpec,
    pub predicate: ProductPredicate,
    #[serde(default)]
    pub stop_on_reaction: bool,
    #[serde(default)]
    pub drift_bound: Option<f64>,
    /// Write one CSV per trajectory under `trajectories/`.
    #[serde(default)]
    pub dump_trajectories: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl ErrorReport {
    fn from_error(e: &Error) -> Self {
        ErrorReport { kind: e.kind().into(), message: e.to_string(), exit_code: e.exit_code() }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self }).to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub argv: Vec<String>,
    /// Parsed arguments plus the contents of any JSON config or manifest.
    pub config: Value,
    pub seed: u64,
    pub status: String,
    pub error: Option<ErrorReport>,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
    /// Seconds per stage, in execution order.
    pub timings: Vec<(String, f64)>,
}

/// Collects outputs, warnings and timings of one run.
struct Run {
    dir: PathBuf,
    outputs: Vec<String>,
    warnings: Vec<String>,
    timings: Vec<(String, f64)>,
    config_files: serde_json::Map<String, Value>,
    seed: u64,
}

impl Run {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self);
        self.timings.push((name.to_string(), start.elapsed().as_secs_f64()));
        out
    }

    fn read_json<T: for<'de> Deserialize<'de>>(&mut self, key: &str, path: &Path) -> Result<T> {
        let text = read_text(path)?;
        let value: Value = serde_json::from_str(&text)?;
        self.config_files.insert(key.to_string(), value.clone());
        Ok(serde_json::from_value(value)?)
    }
}

fn parse_mapping(s: &str) -> Result<Encoding> {
    s.parse().map_err(|_| Error::parse(None, format!("unknown mapping `{s}` (expected jw, bk or parity)")))
}

/// Reads an FCIDUMP and applies the optional energy-window active space.
pub fn ingest_fcidump(path: &Path, window: Option<(f64, f64)>) -> Result<(IntegralFile, MolecularHamiltonian)> {
    let file = IntegralFile::read(path).map_err(|e| in_file(path, e))?;
    let full = MolecularHamiltonian::from_integrals(&file)?;
    let h = match window {
        None => full,
        Some((fermi, width)) => {
            let energies = file
                .orbital_energies
                .as_ref()
                .ok_or_else(|| Error::invalid("energy-window selection needs orbital energies in the integral file"))?;
            freeze_reduce(&full, &select_active_space(energies, fermi, width)?)?.0
        }
    };
    Ok((file, h))
}

pub fn ingest_pes(path: &Path) -> Result<DvrSystem> {
    DvrSystem::read(path).map_err(|e| in_file(path, e))
}

/// Prefixes parse errors with the file they came from.
fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, message } => Error::Parse { line, message: format!("{}: {message}", path.display()) },
        other => other,
    }
}

fn window(fermi: Option<f64>, width: Option<f64>) -> Option<(f64, f64)> {
    fermi.zip(width)
}

fn encode(run: &mut Run, a: &EncodeArgs) -> Result<()> {
    let (op, report) = if let Some(path) = &a.fcidump {
        let encoding = parse_mapping(&a.mapping)?;
        let (file, h) = run.stage("ingest", |_| ingest_fcidump(path, window(a.fermi, a.window)))?;
        let op = run.stage("encode", |_| {
            let mut op = h.to_qubit_operator(encoding)?;
            op.simplify(a.threshold);
            Ok(op)
        })?;
        let n_orb = (h.n_spin_orbitals / 2) as u64;
        let n_e = h.n_electrons as i64;
        let ms2 = if h.n_spin_orbitals == 2 * file.norb { file.ms2 } else { n_e % 2 };
        let (n_alpha, n_beta) = ((n_e + ms2) / 2, (n_e - ms2) / 2);
        if n_alpha < 0 || n_beta < 0 {
            return Err(Error::invalid(format!("inconsistent electron count {n_e} and MS2 {ms2}")));
        }
        let classical = ClassicalComparators::new(n_alpha as u64, n_beta as u64, n_orb, a.bond_dimension, a.bytes_per_amplitude)?;
        let report = ResourceReport::new(encoding.to_string(), &op, Some(classical))?;
        (op, report)
    } else {
        let path = a.pes.as_ref().expect("clap requires one input");
        let sys = run.stage("ingest", |_| ingest_pes(path))?;
        let op = run.stage("encode", |_| {
            let mut op = match a.grid_map {
                GridMap::Binary => binary_map(&sys, a.surface)?,
                GridMap::Direct => direct_map(&sys, a.surface)?,
            };
            op.simplify(a.threshold);
            Ok(op)
        })?;
        let name = match a.grid_map {
            GridMap::Binary => "dvr_binary",
            GridMap::Direct => "dvr_direct",
        };
        let report = ResourceReport::new(name, &op, None)?;
        (op, report)
    };
    run.stage("write", |run| {
        run.write("operator.txt", &op.to_text())?;
        run.write_json("resources.json", &report)
    })
}

#[derive(Serialize)]
struct EigenSummary {
    source: String,
    energies: Vec<f64>,
    residuals: Vec<f64>,
    ground_degeneracy: usize,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_electrons: Option<usize>,
}

fn eigensolve(run: &mut Run, a: &EigensolveArgs) -> Result<()> {
    let mut opts = EigenOptions::new(a.states.max(1), a.tol);
    let summary = if let Some(path) = &a.fcidump {
        let encoding = parse_mapping(&a.mapping)?;
        let (_, h) = run.stage("ingest", |_| ingest_fcidump(path, window(a.fermi, a.window)))?;
        opts.k = 1;
        let g = run.stage("solve", |_| sector_ground_state_encoded(&h, h.n_electrons, encoding, &opts, None))?;
        if g.degeneracy > 1 {
            run.warnings.push(format!("ground state is {}-fold degenerate", g.degeneracy));
        }
        EigenSummary {
            source: "fcidump".into(),
            energies: vec![g.energy],
            residuals: vec![g.residual],
            ground_degeneracy: g.degeneracy,
            iterations: g.iterations,
            n_electrons: Some(h.n_electrons),
        }
    } else if let Some(path) = &a.operator {
        let op = run.stage("ingest", |_| PauliOperator::from_text(&read_text(path)?))?;
        let res = run.stage("solve", |_| {
            let m = op.to_matrix()?;
            m.ensure_hermitian(1e-10)?;
            ground_states_with(&m, &opts, None)
        })?;
        EigenSummary {
            source: "operator".into(),
            energies: res.eigenvalues,
            residuals: res.residuals,
            ground_degeneracy: res.ground_degeneracy,
            iterations: res.iterations,
            n_electrons: None,
        }
    } else {
        let path = a.pes.as_ref().expect("clap requires one input");
        let sys = run.stage("ingest", |_| ingest_pes(path))?;
        let res = run.stage("solve", |_| ground_states_with(&DvrOperator::new(&sys)?, &opts, None))?;
        EigenSummary {
            source: "pes".into(),
            energies: res.eigenvalues,
            residuals: res.residuals,
            ground_degeneracy: res.ground_degeneracy,
            iterations: res.iterations,
            n_electrons: None,
        }
    };
    run.stage("write", |run| run.write_json("eigen.json", &summary))
}

fn pathway(run: &mut Run, a: &PathwayArgs) -> Result<()> {
    let manifest: PathwayManifest = run.read_json("manifest", &a.manifest)?;
    let base = a.manifest.parent().unwrap_or(Path::new("."));
    let reports = run.stage("stations", |_| run_pathways(&manifest, base))?;
    for r in &reports {
        if !r.unresolved_with.is_empty() {
            run.warnings.push(format!("ranking of `{}` unresolved against {}", r.catalyst_id, r.unresolved_with.join(", ")));
        }
    }
    run.stage("write", |run| {
        run.write_json("report.json", &reports)?;
        run.write("report.csv", &reports_to_csv(&reports)?)
    })
}

fn qmd(run: &mut Run, a: &QmdArgs) -> Result<()> {
    let config: QmdConfig = run.read_json("qmd", &a.config)?;
    run.seed = config.seed;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let family: Box<dyn ParameterizedHamiltonian> = match &config.family {
        FamilySpec::HubbardDimer(f) => Box::new(f.clone()),
        FamilySpec::IntegralDirectory { path } => Box::new(run.stage("ingest", |_| IntegralDirectoryFamily::load(base.join(path)))?),
    };
    if config.masses.len() != family.dim() {
        return Err(Error::DimensionMismatch { expected: family.dim(), actual: config.masses.len() });
    }
    let inits = sample_initial_conditions(config.temperature, &config.masses, &config.initial, config.count, config.seed)?;
    let defaults = TrajectoryOptions::default();
    let opts = TrajectoryOptions {
        dt: config.dt,
        t_max: config.t_max,
        stop_on_reaction: config.stop_on_reaction,
        drift_bound: config.drift_bound.unwrap_or(defaults.drift_bound),
        ..defaults
    };
    let records = run.stage("trajectories", |_| Ok(run_ensemble(family.as_ref(), &inits, &config.masses, &config.predicate, &opts)))?;
    let failures: Vec<Value> = records
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.failure.as_ref().map(|m| json!({ "index": i, "message": m })))
        .collect();
    if !failures.is_empty() {
        run.warnings.push(format!("{} of {} trajectories failed and were excluded", failures.len(), records.len()));
    }
    let stats = yield_and_rate(&records)?;
    run.stage("write", |run| {
        if config.dump_trajectories {
            for (i, r) in records.iter().enumerate() {
                run.write(&format!("trajectories/traj_{i:05}.csv"), &r.to_csv()?)?;
            }
        }
        let outcomes: Vec<Value> = records.iter().map(|r| json!({ "reacted": r.reacted, "t_rxn": r.t_rxn, "failed": r.failed() })).collect();
        run.write_json(
            "summary.json",
            &json!({
                "seed": config.seed,
                "count": config.count,
                "yield": stats.q,
                "rate": stats.k,
                "mean_t_rxn": stats.mean_t_rxn,
                "n_reacted": stats.n_reacted,
                "n_completed": stats.n_completed,
                "n_failed": stats.n_failed,
                "failures": failures,
                "trajectories": outcomes,
            }),
        )
    })
}

fn nqd(run: &mut Run, a: &NqdArgs) -> Result<()> {
    let config: NqdConfig = run.read_json("nqd", &a.config)?;
    let sys = run.stage("ingest", |_| ingest_pes(&a.pes))?;
    let result = run.stage("propagate", |_| run_nqd(&sys, &config))?;
    run.warnings.extend(result.summary.warnings.iter().cloned());
    run.stage("write", |run| {
        run.write("timeseries.csv", &result.to_csv()?)?;
        run.write_json("summary.json", &result.summary)
    })
}

fn resources(run: &mut Run, a: &ResourcesArgs) -> Result<String> {
    if let Some(path) = &a.operator {
        let op = PauliOperator::from_text(&read_text(path)?)?;
        let report = ResourceReport::new("operator", &op, None)?;
        run.write_json("resources.json", &report)?;
        return Ok(serde_json::to_string_pretty(&report)?);
    }
    let summary = requirements_summary()?;
    let markdown = summary.to_markdown();
    run.write("requirements.md", &markdown)?;
    run.write_json("requirements.json", &summary)?;
    Ok(match a.format {
        TableFormat::Markdown => markdown,
        TableFormat::Json => serde_json::to_string_pretty(&summary)?,
    })
}

fn execute(run: &mut Run, command: &Command) -> Result<Option<String>> {
    match command {
        Command::Encode(a) => encode(run, a).map(|_| None),
        Command::Eigensolve(a) => eigensolve(run, a).map(|_| None),
        Command::Pathway(a) => pathway(run, a).map(|_| None),
        Command::Qmd(a) => qmd(run, a).map(|_| None),
        Command::Nqd(a) => nqd(run, a).map(|_| None),
        Command::Resources(a) => resources(run, a).map(Some),
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit status.
pub fn run_cli(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let _ = e.print();
            let report = ErrorReport { kind: "usage".into(), message: e.kind().to_string(), exit_code: 2 };
            eprintln!("{}", report.to_json());
            return 2;
        }
    };
    if let Err(e) = fs::create_dir_all(&cli.out) {
        let e = Error::from(e);
        eprintln!("{}", ErrorReport::from_error(&e).to_json());
        return e.exit_code();
    }
    let mut run = Run {
        dir: cli.out.clone(),
        outputs: vec![],
        warnings: vec![],
        timings: vec![],
        config_files: serde_json::Map::new(),
        seed: LANCZOS_SEED,
    };
    let result = execute(&mut run, &cli.command);
    let error = result.as_ref().err().map(ErrorReport::from_error);
    let mut config = serde_json::to_value(&cli).unwrap_or(Value::Null);
    if let Value::Object(map) = &mut config {
        map.insert("files".into(), Value::Object(std::mem::take(&mut run.config_files)));
    }
    let manifest = RunManifest {
        tool: "qcat".into(),
        version: TOOL_VERSION.into(),
        argv: argv.iter().skip(1).cloned().collect(),
        config,
        seed: run.seed,
        status: if error.is_some() { "error" } else { "ok" }.into(),
        error: error.clone(),
        warnings: run.warnings.clone(),
        outputs: run.outputs.clone(),
        timings: run.timings.clone(),
    };
    let manifest_result = serde_json::to_string_pretty(&manifest)
        .map_err(Error::from)
        .and_then(|text| fs::write(cli.out.join("manifest.json"), text + "\n").map_err(Error::from));
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    match (result, manifest_result) {
        (Ok(stdout), Ok(())) => {
            if let Some(text) = stdout {
                print!("{text}");
                if !text.ends_with('\n') {
                    println!();
                }
            }
            0
        }
        (Err(e), _) | (Ok(_), Err(e)) => {
            eprintln!("{}", ErrorReport::from_error(&e).to_json());
            e.exit_code()
        }
    }
}
