//! Reaction-pathway energetics: activation energies, Arrhenius factors and
//! catalyst ranking.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::{freeze_reduce, sector_ground_state_encoded, select_active_space, ActiveSpace, Encoding, IntegralFile, MolecularHamiltonian};
use crate::kernels::{EigenOptions, DEFAULT_EIGEN_TOL};

/// Boltzmann constant in Hartree per Kelvin.
pub const BOLTZMANN_HARTREE_PER_K: f64 = 3.166811563e-6;

/// One stationary point along a pathway. Labels are `R`, `TS...` and `P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathwayStation {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub energy: Option<f64>,
    pub uncertainty: f64,
}

impl PathwayStation {
    pub fn new(label: impl Into<String>, energy: f64, uncertainty: f64) -> Self {
        PathwayStation { label: label.into(), source: None, energy: Some(energy), uncertainty }
    }

    pub fn is_transition_state(&self) -> bool {
        self.label.starts_with("TS")
    }
}

/// `max_TS (E_TS - E_R)`, or 0 when the pathway has no transition state.
pub fn activation_energy(stations: &[PathwayStation]) -> Result<f64> {
    let first = stations.first().ok_or_else(|| Error::invalid("pathway has no stations"))?;
    if first.label != "R" {
        return Err(Error::invalid(format!("first station must be `R`, found `{}`", first.label)));
    }
    let energy = |s: &PathwayStation| {
        s.energy.ok_or_else(|| Error::invalid(format!("station `{}` has no energy", s.label)))
    };
    let reference = energy(first)?;
    let mut barrier: Option<f64> = None;
    for s in stations.iter().filter(|s| s.is_transition_state()) {
        let d = energy(s)? - reference;
        barrier = Some(barrier.map_or(d, |b| b.max(d)));
    }
    Ok(barrier.unwrap_or(0.0))
}

/// Uncertainty of a difference of two energies each known to `tau`.
pub fn activation_uncertainty(stations: &[PathwayStation]) -> f64 {
    2.0 * stations.iter().map(|s| s.uncertainty).fold(0.0, f64::max)
}

/// `exp(-Ea / (k_B T))`, the Arrhenius factor without prefactor.
pub fn arrhenius_factor(ea: f64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::invalid(format!("temperature must be positive, got {temperature}")));
    }
    Ok((-ea / (BOLTZMANN_HARTREE_PER_K * temperature)).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathwayResult {
    pub pathway_id: String,
    pub activation_energy: f64,
    pub uncertainty: f64,
    pub stations: Vec<PathwayStation>,
}

impl PathwayResult {
    pub fn from_stations(pathway_id: impl Into<String>, stations: Vec<PathwayStation>) -> Result<Self> {
        Ok(PathwayResult {
            pathway_id: pathway_id.into(),
            activation_energy: activation_energy(&stations)?,
            uncertainty: activation_uncertainty(&stations),
            stations,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalystReport {
    pub catalyst_id: String,
    pub pathways: Vec<PathwayResult>,
    pub best_pathway: String,
    pub activation_energy: f64,
    pub uncertainty: f64,
    /// Arrhenius factor relative to the top-ranked catalyst; filled by ranking.
    pub relative_rate: Option<f64>,
    /// Catalysts whose barrier lies within the combined uncertainty of this one.
    pub unresolved_with: Vec<String>,
}

impl CatalystReport {
    pub fn new(catalyst_id: impl Into<String>, pathways: Vec<PathwayResult>) -> Result<Self> {
        let catalyst_id = catalyst_id.into();
        let best = pathways
            .iter()
            .min_by(|a, b| a.activation_energy.total_cmp(&b.activation_energy).then_with(|| a.pathway_id.cmp(&b.pathway_id)))
            .ok_or_else(|| Error::invalid(format!("catalyst `{catalyst_id}` has no pathways")))?;
        Ok(CatalystReport {
            best_pathway: best.pathway_id.clone(),
            activation_energy: best.activation_energy,
            uncertainty: best.uncertainty,
            catalyst_id,
            pathways,
            relative_rate: None,
            unresolved_with: vec![],
        })
    }
}

/// Ascending best-pathway barrier, ties by catalyst id. Pairs whose barrier
/// gap is below their combined uncertainty are flagged as unresolved.
pub fn rank_catalysts(mut reports: Vec<CatalystReport>, temperature: f64) -> Result<Vec<CatalystReport>> {
    if reports.is_empty() {
        return Err(Error::invalid("no catalysts to rank"));
    }
    reports.sort_by(|a, b| {
        a.activation_energy
            .total_cmp(&b.activation_energy)
            .then_with(|| a.catalyst_id.cmp(&b.catalyst_id))
    });
    let best = reports[0].activation_energy;
    let ids: Vec<(String, f64, f64)> = reports
        .iter()
        .map(|r| (r.catalyst_id.clone(), r.activation_energy, r.uncertainty))
        .collect();
    for r in &mut reports {
        r.relative_rate = Some(arrhenius_factor(r.activation_energy - best, temperature)?);
        r.unresolved_with = ids
            .iter()
            .filter(|(id, ea, u)| *id != r.catalyst_id && (ea - r.activation_energy).abs() < u.max(r.uncertainty))
            .map(|(id, _, _)| id.clone())
            .collect();
    }
    Ok(reports)
}

/// Energy and its solver tolerance for one Hamiltonian, in its electron-number sector.
pub fn station_energy(h: &MolecularHamiltonian, encoding: Encoding, tol: f64) -> Result<(f64, f64)> {
    let g = sector_ground_state_encoded(h, h.n_electrons, encoding, &EigenOptions::new(1, tol), None)?;
    Ok((g.energy, tol.max(g.residual)))
}

/// Active-space choice for a station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActiveSpaceSpec {
    Explicit { active: Vec<usize>, frozen: Vec<usize>, electrons: usize },
    Window { fermi: f64, width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationSpec {
    pub label: String,
    /// Integral file, relative to the manifest.
    #[serde(default)]
    pub integrals: Option<PathBuf>,
    /// Precomputed energy, used when no integral file is given.
    #[serde(default)]
    pub energy: Option<f64>,
    #[serde(default)]
    pub active_space: Option<ActiveSpaceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathwaySpec {
    pub id: String,
    pub stations: Vec<StationSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalystSpec {
    pub id: String,
    pub pathways: Vec<PathwaySpec>,
}

fn default_temperature() -> f64 {
    298.15
}

fn default_tolerance() -> f64 {
    DEFAULT_EIGEN_TOL
}

fn default_encoding() -> Encoding {
    Encoding::JordanWigner
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathwayManifest {
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_encoding")]
    pub encoding: Encoding,
    pub catalysts: Vec<CatalystSpec>,
}

impl PathwayManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&crate::error::read_text(path)?)?)
    }
}

fn reduce_station(file: &IntegralFile, spec: &Option<ActiveSpaceSpec>) -> Result<MolecularHamiltonian> {
    let full = MolecularHamiltonian::from_integrals(file)?;
    let space = match spec {
        None => return Ok(full),
        Some(ActiveSpaceSpec::Explicit { active, frozen, electrons }) => ActiveSpace::new(active.clone(), frozen.clone(), *electrons)?,
        Some(ActiveSpaceSpec::Window { fermi, width }) => {
            let energies = file
                .orbital_energies
                .as_ref()
                .ok_or_else(|| Error::invalid("energy-window selection needs orbital energies in the integral file"))?;
            select_active_space(energies, *fermi, *width)?
        }
    };
    Ok(freeze_reduce(&full, &space)?.0)
}

/// Computes every station energy (in parallel) and ranks the catalysts.
pub fn run_pathways(manifest: &PathwayManifest, base_dir: &Path) -> Result<Vec<CatalystReport>> {
    let mut jobs = Vec::new();
    for (c, cat) in manifest.catalysts.iter().enumerate() {
        for (p, path) in cat.pathways.iter().enumerate() {
            for (s, st) in path.stations.iter().enumerate() {
                jobs.push((c, p, s, st));
            }
        }
    }
    let energies: Vec<Result<PathwayStation>> = jobs
        .par_iter()
        .map(|&(_, _, _, st)| {
            let mut station = PathwayStation { label: st.label.clone(), source: None, energy: st.energy, uncertainty: 0.0 };
            if let Some(rel) = &st.integrals {
                let path = base_dir.join(rel);
                station.source = Some(rel.display().to_string());
                let file = IntegralFile::read(&path)?;
                let h = reduce_station(&file, &st.active_space)?;
                let (e, tau) = station_energy(&h, manifest.encoding, manifest.tolerance)?;
                station.energy = Some(e);
                station.uncertainty = tau;
            } else if st.energy.is_none() {
                return Err(Error::invalid(format!("station `{}` needs `integrals` or `energy`", st.label)));
            }
            Ok(station)
        })
        .collect();
    let mut energies = energies.into_iter();
    let mut reports = Vec::new();
    for cat in &manifest.catalysts {
        let mut pathways = Vec::new();
        for path in &cat.pathways {
            let stations = (0..path.stations.len()).map(|_| energies.next().expect("one result per job")).collect::<Result<Vec<_>>>()?;
            pathways.push(PathwayResult::from_stations(path.id.clone(), stations)?);
        }
        reports.push(CatalystReport::new(cat.id.clone(), pathways)?);
    }
    rank_catalysts(reports, manifest.temperature)
}

/// CSV summary, one row per catalyst in rank order.
pub fn reports_to_csv(reports: &[CatalystReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "catalyst", "best_pathway", "activation_energy_hartree", "uncertainty_hartree", "relative_rate", "unresolved_with"])?;
    for (i, r) in reports.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            r.catalyst_id.clone(),
            r.best_pathway.clone(),
            format!("{:.12e}", r.activation_energy),
            format!("{:.3e}", r.uncertainty),
            r.relative_rate.map(|v| format!("{v:.12e}")).unwrap_or_default(),
            r.unresolved_with.join(";"),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
