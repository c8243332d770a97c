//! Born-Oppenheimer molecular dynamics with forces from reduced density
//! matrices of the electronic ground state.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::{sector_ground_state, state_rdms, Encoding, IntegralFile, MolecularHamiltonian};
use crate::kernels::EigenOptions;
use crate::pathway::BOLTZMANN_HARTREE_PER_K;
use crate::state::{Basis, StateVector};

/// Central-difference step for integral derivatives, Bohr.
pub const INTEGRAL_FD_STEP: f64 = 1e-4;

/// Atomic time units per femtosecond.
pub const AU_TIME_PER_FS: f64 = 41.341374575751;

/// Electronic Hamiltonian as a function of nuclear coordinates.
pub trait ParameterizedHamiltonian: Sync {
    fn dim(&self) -> usize;
    fn hamiltonian(&self, r: &[f64]) -> Result<MolecularHamiltonian>;
    fn nuclear_repulsion(&self, r: &[f64]) -> f64;

    fn fd_step(&self) -> f64 {
        INTEGRAL_FD_STEP
    }

    fn check_coordinates(&self, r: &[f64]) -> Result<()> {
        if r.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: r.len() });
        }
        Ok(())
    }
}

/// Two-site Hubbard model with hopping `t0 exp(-alpha R)`, on-site `u`,
/// and nuclear repulsion `z^2 / R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubbardDimerFamily {
    pub t0: f64,
    pub alpha: f64,
    pub u: f64,
    pub z: f64,
}

impl HubbardDimerFamily {
    pub fn hopping(&self, r: f64) -> f64 {
        self.t0 * (-self.alpha * r).exp()
    }

    /// Closed-form half-filled ground energy plus nuclear repulsion.
    pub fn exact_energy(&self, r: f64) -> f64 {
        MolecularHamiltonian::hubbard_dimer_ground_energy(self.hopping(r), self.u) + self.z * self.z / r
    }
}

impl ParameterizedHamiltonian for HubbardDimerFamily {
    fn dim(&self) -> usize {
        1
    }

    fn hamiltonian(&self, r: &[f64]) -> Result<MolecularHamiltonian> {
        self.check_coordinates(r)?;
        if !(r[0] > 0.0) {
            return Err(Error::invalid(format!("bond length must be positive, got {}", r[0])));
        }
        Ok(MolecularHamiltonian::hubbard_dimer(self.hopping(r[0]), self.u))
    }

    fn nuclear_repulsion(&self, r: &[f64]) -> f64 {
        self.z * self.z / r[0]
    }
}

/// Integral files at fixed one-dimensional coordinates. Only listed
/// coordinates can be evaluated; there is no interpolation, so forces need
/// stations at `R +- fd_step` as well. Nuclear repulsion is expected inside
/// the files' core energy.
#[derive(Debug, Clone)]
pub struct IntegralDirectoryFamily {
    stations: Vec<(f64, IntegralFile)>,
    step: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct DirectoryIndex {
    #[serde(default)]
    fd_step: Option<f64>,
    stations: Vec<DirectoryEntry>,
}

#[derive(Debug, Clone, Deserialize)]
struct DirectoryEntry {
    r: f64,
    file: String,
}

impl IntegralDirectoryFamily {
    pub fn new(stations: Vec<(f64, IntegralFile)>, fd_step: f64) -> Result<Self> {
        if stations.is_empty() {
            return Err(Error::invalid("integral directory lists no stations"));
        }
        Ok(IntegralDirectoryFamily { stations, step: fd_step })
    }

    /// Reads `index.json` (`{"fd_step": .., "stations": [{"r": .., "file": ..}]}`).
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let index: DirectoryIndex = serde_json::from_str(&crate::error::read_text(dir.join("index.json"))?)?;
        let stations = index
            .stations
            .iter()
            .map(|e| Ok((e.r, IntegralFile::read(dir.join(&e.file))?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(stations, index.fd_step.unwrap_or(INTEGRAL_FD_STEP))
    }

    fn lookup(&self, r: f64) -> Result<&IntegralFile> {
        self.stations
            .iter()
            .find(|(x, _)| (x - r).abs() <= 1e-9 * x.abs().max(1.0))
            .map(|(_, f)| f)
            .ok_or_else(|| Error::invalid(format!("no integral station at R = {r}")))
    }
}

impl ParameterizedHamiltonian for IntegralDirectoryFamily {
    fn dim(&self) -> usize {
        1
    }

    fn hamiltonian(&self, r: &[f64]) -> Result<MolecularHamiltonian> {
        self.check_coordinates(r)?;
        MolecularHamiltonian::from_integrals(self.lookup(r[0])?)
    }

    fn nuclear_repulsion(&self, _r: &[f64]) -> f64 {
        0.0
    }

    fn fd_step(&self) -> f64 {
        self.step
    }
}

/// Ground state of the family at `r`, optionally warm-started.
#[derive(Debug, Clone)]
pub struct ElectronicState {
    pub energy: f64,
    pub state: StateVector,
}

pub fn electronic_ground_state(
    ph: &dyn ParameterizedHamiltonian,
    r: &[f64],
    tol: f64,
    warm_start: Option<&StateVector>,
) -> Result<ElectronicState> {
    let h = ph.hamiltonian(r)?;
    let g = sector_ground_state(&h, h.n_electrons, &EigenOptions::new(1, tol), warm_start)?;
    Ok(ElectronicState { energy: g.energy, state: g.state })
}

/// `-dE/dR` from RDMs and finite-difference integral derivatives. Rejects
/// states whose eigen-residual exceeds `residual_tol`.
pub fn quantum_force(ph: &dyn ParameterizedHamiltonian, r: &[f64], psi: &StateVector, residual_tol: f64) -> Result<Vec<f64>> {
    let h = ph.hamiltonian(r)?;
    let n = h.n_spin_orbitals;
    if psi.basis() != &(Basis::Determinant { n_modes: n }) {
        return Err(Error::invalid("force needs a determinant-basis state of the family's modes"));
    }
    let op = h.to_qubit_operator(Encoding::JordanWigner)?;
    let mut hpsi = vec![Complex64::default(); psi.dim()];
    op.apply(psi.amplitudes(), &mut hpsi)?;
    let e: Complex64 = psi.amplitudes().iter().zip(&hpsi).map(|(a, b)| a.conj() * b).sum();
    let residual = hpsi
        .iter()
        .zip(psi.amplitudes())
        .map(|(hv, v)| (hv - v * e.re).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > residual_tol {
        return Err(Error::NotEigenstate { residual, tolerance: residual_tol });
    }
    let (rdm1, rdm2) = state_rdms(psi, n)?;
    let delta = ph.fd_step();
    let mut force = Vec::with_capacity(r.len());
    for a in 0..r.len() {
        let mut plus = r.to_vec();
        let mut minus = r.to_vec();
        plus[a] += delta;
        minus[a] -= delta;
        let (hp, hm) = (ph.hamiltonian(&plus)?, ph.hamiltonian(&minus)?);
        let derivative = difference_quotient(&hp, &hm, 2.0 * delta)?;
        let dv = (ph.nuclear_repulsion(&plus) - ph.nuclear_repulsion(&minus)) / (2.0 * delta);
        force.push(-(derivative.energy_from_rdms(&rdm1, &rdm2) + dv));
    }
    Ok(force)
}

/// `(a - b) / width` term by term, as a Hamiltonian.
fn difference_quotient(a: &MolecularHamiltonian, b: &MolecularHamiltonian, width: f64) -> Result<MolecularHamiltonian> {
    if a.n_spin_orbitals != b.n_spin_orbitals {
        return Err(Error::DimensionMismatch { expected: a.n_spin_orbitals, actual: b.n_spin_orbitals });
    }
    let mut d = MolecularHamiltonian::new(a.n_spin_orbitals, (a.core_energy - b.core_energy) / width, a.n_electrons);
    d.h1 = (&a.h1 - &b.h1) / width;
    let mut h2: BTreeMap<[usize; 4], f64> = BTreeMap::new();
    for (k, v) in &a.h2 {
        *h2.entry(*k).or_default() += v / width;
    }
    for (k, v) in &b.h2 {
        *h2.entry(*k).or_default() -= v / width;
    }
    d.h2 = h2;
    Ok(d)
}

/// Velocity-Verlet step; `force` is evaluated once at the new positions.
pub fn verlet_step(
    r: &[f64],
    p: &[f64],
    f: &[f64],
    masses: &[f64],
    dt: f64,
    mut force: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let half: Vec<f64> = p.iter().zip(f).map(|(p, f)| p + 0.5 * dt * f).collect();
    let r_new: Vec<f64> = r.iter().zip(&half).zip(masses).map(|((r, p), m)| r + dt * p / m).collect();
    let f_new = force(&r_new)?;
    let p_new: Vec<f64> = half.iter().zip(&f_new).map(|(p, f)| p + 0.5 * dt * f).collect();
    Ok((r_new, p_new, f_new))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PositionSpec {
    Point { r: Vec<f64> },
    Gaussian { mean: Vec<f64>, std: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub r: Vec<f64>,
    pub p: Vec<f64>,
}

/// Maxwell-Boltzmann momenta and positions per `spec`. Sample `i` draws from
/// its own stream of the seeded generator, so samples do not depend on
/// how many others are drawn or in which order.
pub fn sample_initial_conditions(
    temperature: f64,
    masses: &[f64],
    spec: &PositionSpec,
    count: usize,
    seed: u64,
) -> Result<Vec<InitialCondition>> {
    if !(temperature > 0.0) {
        return Err(Error::invalid(format!("temperature must be positive, got {temperature}")));
    }
    if count == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let d = masses.len();
    if let Some(m) = masses.iter().find(|m| !(**m > 0.0)) {
        return Err(Error::invalid(format!("masses must be positive, got {m}")));
    }
    match spec {
        PositionSpec::Point { r } if r.len() != d => return Err(Error::DimensionMismatch { expected: d, actual: r.len() }),
        PositionSpec::Gaussian { mean, std } if mean.len() != d || std.len() != d => {
            return Err(Error::DimensionMismatch { expected: d, actual: mean.len().min(std.len()) })
        }
        PositionSpec::Gaussian { std, .. } if std.iter().any(|s| !(*s >= 0.0)) => {
            return Err(Error::invalid("position widths must be non-negative"))
        }
        _ => {}
    }
    let kt = BOLTZMANN_HARTREE_PER_K * temperature;
    let standard = Normal::new(0.0, 1.0).expect("unit normal");
    Ok((0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let p = masses.iter().map(|m| (m * kt).sqrt() * standard.sample(&mut rng)).collect();
            let r = match spec {
                PositionSpec::Point { r } => r.clone(),
                PositionSpec::Gaussian { mean, std } => {
                    mean.iter().zip(std).map(|(mu, s)| mu + s * standard.sample(&mut rng)).collect()
                }
            };
            InitialCondition { r, p }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Above,
    Below,
}

/// Product region `R[coordinate] > threshold` (or `<`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPredicate {
    pub coordinate: usize,
    pub threshold: f64,
    pub direction: Direction,
}

impl ProductPredicate {
    pub fn holds(&self, r: &[f64]) -> bool {
        match self.direction {
            Direction::Above => r[self.coordinate] > self.threshold,
            Direction::Below => r[self.coordinate] < self.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOptions {
    pub dt: f64,
    pub t_max: f64,
    pub eigen_tol: f64,
    pub residual_tol: f64,
    /// Relative total-energy drift that triggers a warning.
    pub drift_bound: f64,
    pub stop_on_reaction: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        TrajectoryOptions {
            dt: AU_TIME_PER_FS,
            t_max: 100.0 * AU_TIME_PER_FS,
            eigen_tol: 1e-10,
            residual_tol: 1e-6,
            drift_bound: 1e-4,
            stop_on_reaction: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub momenta: Vec<Vec<f64>>,
    pub total_energy: Vec<f64>,
    pub reacted: bool,
    pub t_rxn: Option<f64>,
    /// Set when the electronic solve failed; such records are excluded from statistics.
    pub failure: Option<String>,
    pub max_relative_drift: f64,
}

impl TrajectoryRecord {
    /// Record with only a reaction outcome, for scripted ensembles.
    pub fn outcome(t_rxn: Option<f64>) -> Self {
        TrajectoryRecord {
            times: vec![],
            positions: vec![],
            momenta: vec![],
            total_energy: vec![],
            reacted: t_rxn.is_some(),
            t_rxn,
            failure: None,
            max_relative_drift: 0.0,
        }
    }

    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let d = self.positions.first().map_or(0, |r| r.len());
        let mut header = vec!["t".to_string()];
        header.extend((0..d).map(|a| format!("r{a}")));
        header.extend((0..d).map(|a| format!("p{a}")));
        header.push("e_total".into());
        w.write_record(&header)?;
        for i in 0..self.times.len() {
            let mut row = vec![format!("{:.12e}", self.times[i])];
            row.extend(self.positions[i].iter().map(|v| format!("{v:.12e}")));
            row.extend(self.momenta[i].iter().map(|v| format!("{v:.12e}")));
            row.push(format!("{:.12e}", self.total_energy[i]));
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn kinetic_energy(p: &[f64], masses: &[f64]) -> f64 {
    p.iter().zip(masses).map(|(p, m)| 0.5 * p * p / m).sum()
}

/// Integrates one trajectory with on-the-fly ground states and RDM forces.
pub fn run_trajectory(
    ph: &dyn ParameterizedHamiltonian,
    init: &InitialCondition,
    masses: &[f64],
    predicate: &ProductPredicate,
    opts: &TrajectoryOptions,
) -> TrajectoryRecord {
    let mut rec = TrajectoryRecord {
        times: vec![],
        positions: vec![],
        momenta: vec![],
        total_energy: vec![],
        reacted: false,
        t_rxn: None,
        failure: None,
        max_relative_drift: 0.0,
    };
    if let Err(e) = integrate(ph, init, masses, predicate, opts, &mut rec) {
        rec.failure = Some(e.to_string());
    }
    rec
}

fn integrate(
    ph: &dyn ParameterizedHamiltonian,
    init: &InitialCondition,
    masses: &[f64],
    predicate: &ProductPredicate,
    opts: &TrajectoryOptions,
    rec: &mut TrajectoryRecord,
) -> Result<()> {
    if !(opts.dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    if masses.len() != ph.dim() || init.r.len() != ph.dim() || init.p.len() != ph.dim() {
        return Err(Error::DimensionMismatch { expected: ph.dim(), actual: init.r.len() });
    }
    if predicate.coordinate >= ph.dim() {
        return Err(Error::IndexOutOfRange { index: predicate.coordinate, limit: ph.dim() });
    }
    let mut electronic = electronic_ground_state(ph, &init.r, opts.eigen_tol, None)?;
    let mut f = quantum_force(ph, &init.r, &electronic.state, opts.residual_tol)?;
    let (mut r, mut p) = (init.r.clone(), init.p.clone());
    let mut t = 0.0;
    let total = |r: &[f64], p: &[f64], e: f64| e + ph.nuclear_repulsion(r) + kinetic_energy(p, masses);
    let e0 = total(&r, &p, electronic.energy);
    let record = |rec: &mut TrajectoryRecord, t: f64, r: &[f64], p: &[f64], e: f64| {
        rec.times.push(t);
        rec.positions.push(r.to_vec());
        rec.momenta.push(p.to_vec());
        rec.total_energy.push(e);
        let drift = (e - e0).abs() / e0.abs().max(f64::MIN_POSITIVE);
        rec.max_relative_drift = rec.max_relative_drift.max(drift);
    };
    record(rec, t, &r, &p, e0);
    if predicate.holds(&r) {
        rec.reacted = true;
        rec.t_rxn = Some(0.0);
        if opts.stop_on_reaction {
            return Ok(());
        }
    }
    let steps = (opts.t_max / opts.dt).round() as usize;
    for _ in 0..steps {
        let warm = electronic.state.clone();
        let (r_new, p_new, f_new) = verlet_step(&r, &p, &f, masses, opts.dt, |x| {
            electronic = electronic_ground_state(ph, x, opts.eigen_tol, Some(&warm))?;
            quantum_force(ph, x, &electronic.state, opts.residual_tol)
        })?;
        let t_new = t + opts.dt;
        if !rec.reacted && predicate.holds(&r_new) {
            // Linear interpolation of the crossing inside the step.
            let (a, b) = (r[predicate.coordinate], r_new[predicate.coordinate]);
            let frac = if b != a { ((predicate.threshold - a) / (b - a)).clamp(0.0, 1.0) } else { 1.0 };
            rec.reacted = true;
            rec.t_rxn = Some(t + frac * opts.dt);
        }
        r = r_new;
        p = p_new;
        f = f_new;
        t = t_new;
        let e = total(&r, &p, electronic.energy);
        record(rec, t, &r, &p, e);
        if rec.max_relative_drift > opts.drift_bound {
            return Err(Error::invalid(format!(
                "relative energy drift {:.3e} exceeds bound {:.1e} at t = {t}",
                rec.max_relative_drift, opts.drift_bound
            )));
        }
        if rec.reacted && opts.stop_on_reaction {
            break;
        }
    }
    Ok(())
}

/// Runs every initial condition in parallel; output order follows input order.
pub fn run_ensemble(
    ph: &dyn ParameterizedHamiltonian,
    inits: &[InitialCondition],
    masses: &[f64],
    predicate: &ProductPredicate,
    opts: &TrajectoryOptions,
) -> Vec<TrajectoryRecord> {
    inits.par_iter().map(|init| run_trajectory(ph, init, masses, predicate, opts)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YieldRate {
    /// Reacted fraction of completed trajectories.
    pub q: f64,
    /// Inverse mean reaction time; absent when nothing reacted.
    pub k: Option<f64>,
    pub mean_t_rxn: Option<f64>,
    pub n_reacted: usize,
    pub n_completed: usize,
    pub n_failed: usize,
}

pub fn yield_and_rate(records: &[TrajectoryRecord]) -> Result<YieldRate> {
    if records.is_empty() {
        return Err(Error::invalid("no trajectories"));
    }
    let completed: Vec<&TrajectoryRecord> = records.iter().filter(|r| !r.failed()).collect();
    let n_failed = records.len() - completed.len();
    if completed.is_empty() {
        return Err(Error::invalid(format!("all {n_failed} trajectories failed")));
    }
    let times: Vec<f64> = completed.iter().filter(|r| r.reacted).filter_map(|r| r.t_rxn).collect();
    let mean = (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64);
    Ok(YieldRate {
        q: times.len() as f64 / completed.len() as f64,
        k: mean.map(|m| 1.0 / m),
        mean_t_rxn: mean,
        n_reacted: times.len(),
        n_completed: completed.len(),
        n_failed,
    })
}
