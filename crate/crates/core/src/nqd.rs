//! Nuclear wavepacket dynamics on tabulated, optionally coupled, surfaces:
//! product probability, flux through a dividing surface and rates.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::evolve::krylov_propagate;
use crate::kernels::{ground_states_with, EigenOptions, KrylovOptions};
use crate::nuclear::dvr::apply_along_axis;
use crate::nuclear::{DvrGrid, DvrOperator, DvrSystem};
use crate::qmd::Direction;
use crate::sparse::LinearOperator;
use crate::state::{Basis, StateVector};

/// Norm fraction allowed in the boundary strips before propagation aborts.
pub const DEFAULT_LEAK_THRESHOLD: f64 = 1e-4;

/// Norm fraction a new packet may lose to grid truncation.
pub const TRUNCATION_TOLERANCE: f64 = 1e-8;

/// Default number of propagation steps per run.
pub const DEFAULT_STEPS: usize = 100;

/// Surface-major amplitudes: entry `I * n_points + g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavepacket {
    pub shape: Vec<usize>,
    pub n_surfaces: usize,
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl Wavepacket {
    pub fn new(sys: &DvrSystem, amplitudes: Vec<Complex64>, time: f64) -> Result<Self> {
        let expected = sys.n_points() * sys.n_surfaces();
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: amplitudes.len() });
        }
        let wp = Wavepacket { shape: sys.grid.shape(), n_surfaces: sys.n_surfaces(), amplitudes, time };
        let norm = wp.norm();
        if (norm - 1.0).abs() > crate::state::NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(wp)
    }

    pub fn n_points(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn surface(&self, s: usize) -> &[Complex64] {
        let n = self.n_points();
        &self.amplitudes[s * n..(s + 1) * n]
    }

    pub fn surface_population(&self, s: usize) -> f64 {
        self.surface(s).iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability per grid point, summed over surfaces.
    pub fn density(&self) -> Vec<f64> {
        let n = self.n_points();
        (0..n)
            .map(|g| (0..self.n_surfaces).map(|s| self.amplitudes[s * n + g].norm_sqr()).sum())
            .collect()
    }

    pub fn position_mean(&self, grid: &DvrGrid, axis: usize) -> f64 {
        let density = self.density();
        density.iter().enumerate().map(|(g, p)| p * grid.point(g)[axis]).sum::<f64>() / density.iter().sum::<f64>()
    }

    /// Standard deviation of the position density along `axis`.
    pub fn position_width(&self, grid: &DvrGrid, axis: usize) -> f64 {
        let density = self.density();
        let total: f64 = density.iter().sum();
        let mean = self.position_mean(grid, axis);
        let var = density.iter().enumerate().map(|(g, p)| p * (grid.point(g)[axis] - mean).powi(2)).sum::<f64>() / total;
        var.sqrt()
    }

    pub fn energy(&self, op: &DvrOperator) -> f64 {
        let mut out = vec![Complex64::default(); self.amplitudes.len()];
        op.apply(&self.amplitudes, &mut out);
        self.amplitudes.iter().zip(&out).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
    }

    pub fn to_state(&self) -> Result<StateVector> {
        StateVector::from_normalized(Basis::Grid { shape: self.shape.clone(), surfaces: self.n_surfaces }, self.amplitudes.clone())
    }
}

/// Hyperplane `x_axis = threshold` separating reactants from products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DividingSurface {
    pub axis: usize,
    pub threshold: f64,
    pub product_side: Direction,
}

impl DividingSurface {
    /// Index of the first grid point above the threshold along the axis,
    /// requiring points on both sides.
    fn split_index(&self, grid: &DvrGrid) -> Result<usize> {
        let ax = grid.axes.get(self.axis).ok_or(Error::IndexOutOfRange { index: self.axis, limit: grid.dims() })?;
        let above = (0..ax.points).find(|&i| ax.coordinate(i) > self.threshold);
        match above {
            Some(i) if i > 0 => Ok(i),
            _ => Err(Error::invalid(format!(
                "dividing surface at {} is not inside the grid range [{}, {}]",
                self.threshold,
                ax.x_min,
                ax.x_max()
            ))),
        }
    }

    fn is_product(&self, x: f64) -> bool {
        match self.product_side {
            Direction::Above => x > self.threshold,
            Direction::Below => x <= self.threshold,
        }
    }
}

/// Product of per-axis Gaussians `exp(-(x-x0)^2/(4 s^2) + i k (x-x0))` on
/// `surface_index`, normalized on the grid. Fails when more than
/// [`TRUNCATION_TOLERANCE`] of the norm would fall outside the grid.
pub fn gaussian_packet(sys: &DvrSystem, surface_index: usize, center: &[f64], widths: &[f64], momenta: &[f64]) -> Result<Wavepacket> {
    gaussian_packet_with(sys, surface_index, center, widths, momenta, true).map(|(wp, _)| wp)
}

/// As [`gaussian_packet`]; with `strict = false` truncation is returned as a warning.
pub fn gaussian_packet_with(
    sys: &DvrSystem,
    surface_index: usize,
    center: &[f64],
    widths: &[f64],
    momenta: &[f64],
    strict: bool,
) -> Result<(Wavepacket, Option<String>)> {
    let grid = &sys.grid;
    let d = grid.dims();
    for v in [center, widths, momenta] {
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: v.len() });
        }
    }
    sys.surface(surface_index)?;
    let mut kept = 1.0;
    for (a, ax) in grid.axes.iter().enumerate() {
        if !(widths[a] > 0.0) {
            return Err(Error::invalid(format!("packet width must be positive, got {}", widths[a])));
        }
        if center[a] < ax.x_min || center[a] > ax.x_max() {
            return Err(Error::invalid(format!("packet center {} outside axis {a}", center[a])));
        }
        // Grid mass against the same sum continued 12 widths past both edges.
        let density = |x: f64| (-(x - center[a]).powi(2) / (2.0 * widths[a] * widths[a])).exp();
        let inside: f64 = (0..ax.points).map(|i| density(ax.coordinate(i))).sum();
        let extra = (12.0 * widths[a] / ax.dx).ceil() as i64;
        let outside: f64 = (1..=extra)
            .map(|k| density(ax.x_min - k as f64 * ax.dx) + density(ax.x_max() + k as f64 * ax.dx))
            .sum();
        kept *= inside / (inside + outside);
    }
    let lost = 1.0 - kept;
    let warning = (lost > TRUNCATION_TOLERANCE).then(|| format!("grid truncates {lost:.3e} of the packet norm"));
    if strict {
        if let Some(w) = &warning {
            return Err(Error::invalid(w.clone()));
        }
    }
    let n = sys.n_points();
    let mut amps = vec![Complex64::default(); n * sys.n_surfaces()];
    for g in 0..n {
        let x = grid.point(g);
        let mut phase = 0.0;
        let mut env = 0.0;
        for a in 0..d {
            let dx = x[a] - center[a];
            env -= dx * dx / (4.0 * widths[a] * widths[a]);
            phase += momenta[a] * dx;
        }
        amps[surface_index * n + g] = Complex64::from_polar(env.exp(), phase);
    }
    normalize(&mut amps);
    Ok((Wavepacket::new(sys, amps, 0.0)?, warning))
}

fn normalize(amps: &mut [Complex64]) {
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
}

/// Ground state of surface 0 placed unchanged on `target_surface`.
pub fn franck_condon_initial(sys: &DvrSystem, target_surface: usize) -> Result<Wavepacket> {
    if sys.n_surfaces() < 2 {
        return Err(Error::invalid("Franck-Condon placement needs at least two surfaces"));
    }
    sys.surface(target_surface)?;
    let ground_sys = DvrSystem::new(sys.grid.clone(), vec![sys.surfaces[0].clone()])?;
    let op = DvrOperator::new(&ground_sys)?;
    let res = ground_states_with(&op, &EigenOptions::new(1, 1e-10), None)?;
    let mut v = res.eigenvectors[0].clone();
    let pivot = v.iter().copied().fold(Complex64::default(), |best, a| if a.norm() > best.norm() { a } else { best });
    let phase = pivot.conj() / pivot.norm();
    v.iter_mut().for_each(|a| *a *= phase);
    normalize(&mut v);
    let n = sys.n_points();
    let mut amps = vec![Complex64::default(); n * sys.n_surfaces()];
    amps[target_surface * n..(target_surface + 1) * n].copy_from_slice(&v);
    Wavepacket::new(sys, amps, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationMethod {
    ExactKrylov,
    /// Strang splitting: half potential step, exact kinetic step, half potential step.
    Trotter2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationOptions {
    /// `None` disables the boundary check.
    pub leak_threshold: Option<f64>,
    /// Krylov local error target per unit time.
    pub krylov_tol: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions { leak_threshold: Some(DEFAULT_LEAK_THRESHOLD), krylov_tol: 1e-13 }
    }
}

/// Width of the boundary strip checked for leakage on an axis of `l` points.
pub fn boundary_strip(l: usize) -> usize {
    (l / 32).max(2).min(l / 2)
}

/// Probability in the outer strips of every axis.
pub fn boundary_probability(wp: &Wavepacket, grid: &DvrGrid) -> f64 {
    let strips: Vec<usize> = grid.axes.iter().map(|a| boundary_strip(a.points)).collect();
    wp.density()
        .iter()
        .enumerate()
        .filter(|(g, _)| {
            grid.unravel(*g)
                .iter()
                .zip(&grid.axes)
                .zip(&strips)
                .any(|((&i, ax), &w)| i < w || i + w >= ax.points)
        })
        .map(|(_, p)| p)
        .sum()
}

/// Precomputed factors of one split-operator step.
struct SplitPropagator {
    kinetic: Vec<DMatrix<Complex64>>,
    /// Per grid point, `exp(-i W(g) dt / 2)` as an `S x S` row-major block.
    half_potential: Vec<Vec<Complex64>>,
    shape: Vec<usize>,
    n_surfaces: usize,
}

impl SplitPropagator {
    fn new(op: &DvrOperator, dt: f64) -> Self {
        let kinetic = (0..op.shape().len())
            .map(|a| exponentiate(op.kinetic(a).clone(), dt))
            .collect();
        let s = op.n_surfaces();
        let half_potential = (0..op.n_points())
            .into_par_iter()
            .map(|g| {
                let w = DMatrix::from_fn(s, s, |i, j| {
                    if i == j {
                        op.potential(i)[g]
                    } else {
                        op.couplings()
                            .iter()
                            .find(|(a, b, _)| (*a, *b) == (i.min(j), i.max(j)))
                            .map_or(0.0, |(_, _, v)| v[g])
                    }
                });
                let u = exponentiate(w, 0.5 * dt);
                (0..s * s).map(|k| u[(k / s, k % s)]).collect()
            })
            .collect();
        SplitPropagator { kinetic, half_potential, shape: op.shape().to_vec(), n_surfaces: s }
    }

    fn apply_potential(&self, amps: &mut [Complex64]) {
        let s = self.n_surfaces;
        let n = self.half_potential.len();
        if s == 1 {
            amps.par_iter_mut().zip(&self.half_potential).for_each(|(a, u)| *a *= u[0]);
            return;
        }
        let mut local = vec![Complex64::default(); s];
        for g in 0..n {
            for (i, l) in local.iter_mut().enumerate() {
                *l = self.half_potential[g][i * s..(i + 1) * s].iter().enumerate().map(|(j, u)| u * amps[j * n + g]).sum();
            }
            for (i, l) in local.iter().enumerate() {
                amps[i * n + g] = *l;
            }
        }
    }

    fn step(&self, amps: &mut [Complex64], scratch: &mut [Complex64]) {
        self.apply_potential(amps);
        let n = self.half_potential.len();
        for surface in 0..self.n_surfaces {
            let block = &mut amps[surface * n..(surface + 1) * n];
            let tmp = &mut scratch[..n];
            for (a, u) in self.kinetic.iter().enumerate() {
                let stride: usize = self.shape[a + 1..].iter().product();
                apply_along_axis(u, self.shape[a], stride, block, tmp, |o, v| *o = v);
                block.copy_from_slice(tmp);
            }
        }
        self.apply_potential(amps);
    }
}

/// `exp(-i M t)` for a real symmetric matrix.
fn exponentiate(m: DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(m);
    let q = eig.eigenvectors.map(|v| Complex64::new(v, 0.0));
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t)));
    &q * phases * q.transpose()
}

/// Propagates `steps` steps of `dt`, calling `observe` on the initial packet
/// and after every step.
pub fn propagate_with(
    sys: &DvrSystem,
    wp: &Wavepacket,
    dt: f64,
    steps: usize,
    method: PropagationMethod,
    opts: &PropagationOptions,
    mut observe: impl FnMut(&Wavepacket) -> Result<()>,
) -> Result<Wavepacket> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    if wp.shape != sys.grid.shape() || wp.n_surfaces != sys.n_surfaces() {
        return Err(Error::DimensionMismatch { expected: sys.n_points() * sys.n_surfaces(), actual: wp.amplitudes.len() });
    }
    let op = DvrOperator::new(sys)?;
    let split = match method {
        PropagationMethod::Trotter2 => Some(SplitPropagator::new(&op, dt)),
        PropagationMethod::ExactKrylov => None,
    };
    let krylov = KrylovOptions { tol: opts.krylov_tol, ..KrylovOptions::default() };
    let mut current = wp.clone();
    let mut scratch = vec![Complex64::default(); sys.n_points()];
    observe(&current)?;
    for k in 0..steps {
        match &split {
            Some(s) => s.step(&mut current.amplitudes, &mut scratch),
            None => krylov_propagate(&op, &mut current.amplitudes, dt, &krylov),
        }
        current.time = wp.time + (k + 1) as f64 * dt;
        if let Some(limit) = opts.leak_threshold {
            let p = boundary_probability(&current, &sys.grid);
            if p > limit {
                return Err(Error::BoundaryLeak { probability: p, time: current.time });
            }
        }
        observe(&current)?;
    }
    Ok(current)
}

/// Time series of packets, initial packet included.
pub fn propagate(
    sys: &DvrSystem,
    wp: &Wavepacket,
    dt: f64,
    steps: usize,
    method: PropagationMethod,
    opts: &PropagationOptions,
) -> Result<Vec<Wavepacket>> {
    let mut series = Vec::with_capacity(steps + 1);
    propagate_with(sys, wp, dt, steps, method, opts, |w| {
        series.push(w.clone());
        Ok(())
    })?;
    Ok(series)
}

/// Probability on the product side, all surfaces.
pub fn product_probability(wp: &Wavepacket, grid: &DvrGrid, ds: &DividingSurface) -> Result<f64> {
    ds.split_index(grid)?;
    let ax = &grid.axes[ds.axis];
    let stride = grid.stride(ds.axis);
    Ok(wp
        .density()
        .iter()
        .enumerate()
        .filter(|(g, _)| ds.is_product(ax.coordinate(g / stride % ax.points)))
        .map(|(_, p)| p)
        .sum::<f64>()
        .clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FluxScheme {
    /// `2 sum Im(c_i* T_ij c_j)` over kinetic elements crossing the surface
    /// (`i` product side); the exact rate of change of the product probability.
    #[default]
    KineticCut,
    /// `(1/m) Im(chi* dchi/dx)` at the midpoint between the two grid points
    /// straddling the surface, by centered difference.
    Centered,
}

/// Probability current into the product region.
pub fn probability_flux(wp: &Wavepacket, op: &DvrOperator, grid: &DvrGrid, ds: &DividingSurface, scheme: FluxScheme) -> Result<f64> {
    let split = ds.split_index(grid)?;
    let ax = &grid.axes[ds.axis];
    let l = ax.points;
    let stride = grid.stride(ds.axis);
    let n = wp.n_points();
    let sign = match ds.product_side {
        Direction::Above => 1.0,
        Direction::Below => -1.0,
    };
    let t = op.kinetic(ds.axis);
    let mut flux = 0.0;
    for s in 0..wp.n_surfaces {
        let block = wp.surface(s);
        for outer in 0..n / (l * stride) {
            for inner in 0..stride {
                let at = |i: usize| block[outer * l * stride + i * stride + inner];
                match scheme {
                    FluxScheme::KineticCut => {
                        // Upper side i >= split, lower side j < split.
                        for i in split..l {
                            let ci = at(i).conj();
                            for j in 0..split {
                                flux += sign * 2.0 * (ci * t[(i, j)] * at(j)).im;
                            }
                        }
                    }
                    FluxScheme::Centered => {
                        let (lo, hi) = (at(split - 1), at(split));
                        flux += sign * (lo.conj() * hi).im / (ax.mass * ax.dx * ax.dx);
                    }
                }
            }
        }
    }
    Ok(flux)
}

/// Trapezoid integral of `values` over `times`.
pub fn trapezoid(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), actual: values.len() });
    }
    Ok(times.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum())
}

/// `k = <J> / rho_reactants`, with `<J>` the trapezoid time average.
pub fn nqd_rate(times: &[f64], flux: &[f64], reactant_density: f64) -> Result<f64> {
    if !(reactant_density > 0.0) {
        return Err(Error::invalid("reactant density must be positive"));
    }
    if times.len() < 2 {
        return Err(Error::invalid("rate needs at least two time points"));
    }
    let total = times[times.len() - 1] - times[0];
    if !(total > 0.0) {
        return Err(Error::invalid("time series must increase"));
    }
    Ok(trapezoid(times, flux)? / total / reactant_density)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialPacket {
    Gaussian { surface: usize, center: Vec<f64>, widths: Vec<f64>, momenta: Vec<f64> },
    FranckCondon { target_surface: usize },
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn default_method() -> PropagationMethod {
    PropagationMethod::ExactKrylov
}

fn default_leak() -> Option<f64> {
    Some(DEFAULT_LEAK_THRESHOLD)
}

fn default_strict() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NqdConfig {
    pub initial: InitialPacket,
    pub dividing_surface: DividingSurface,
    pub dt: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_method")]
    pub method: PropagationMethod,
    #[serde(default)]
    pub flux: FluxScheme,
    #[serde(default = "default_leak")]
    pub leak_threshold: Option<f64>,
    #[serde(default = "default_strict")]
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NqdSummary {
    pub q_initial: f64,
    pub q_final: f64,
    pub delta_q: f64,
    pub integrated_flux: f64,
    pub reactant_density: f64,
    /// Absent when the initial packet has no reactant population.
    pub k: Option<f64>,
    pub norm_drift: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NqdRun {
    pub times: Vec<f64>,
    pub q: Vec<f64>,
    pub j: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
    pub summary: NqdSummary,
}

impl NqdRun {
    /// `t,Q,J,pop0,pop1,...` rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let s = self.populations.first().map_or(0, |p| p.len());
        let mut header = vec!["t".to_string(), "Q".into(), "J".into()];
        header.extend((0..s).map(|i| format!("pop{i}")));
        w.write_record(&header)?;
        for k in 0..self.times.len() {
            let mut row = vec![format!("{:.12e}", self.times[k]), format!("{:.12e}", self.q[k]), format!("{:.12e}", self.j[k])];
            row.extend(self.populations[k].iter().map(|p| format!("{p:.12e}")));
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Full run: initial packet, propagation, Q(t), J(t), summary.
pub fn run_nqd(sys: &DvrSystem, config: &NqdConfig) -> Result<NqdRun> {
    let mut warnings = Vec::new();
    let wp = match &config.initial {
        InitialPacket::Gaussian { surface, center, widths, momenta } => {
            let (wp, warning) = gaussian_packet_with(sys, *surface, center, widths, momenta, config.strict)?;
            warnings.extend(warning);
            wp
        }
        InitialPacket::FranckCondon { target_surface } => franck_condon_initial(sys, *target_surface)?,
    };
    let op = DvrOperator::new(sys)?;
    let opts = PropagationOptions { leak_threshold: config.leak_threshold, ..PropagationOptions::default() };
    let (mut times, mut q, mut j, mut populations) = (vec![], vec![], vec![], vec![]);
    let last = propagate_with(sys, &wp, config.dt, config.steps, config.method, &opts, |w| {
        times.push(w.time);
        q.push(product_probability(w, &sys.grid, &config.dividing_surface)?);
        j.push(probability_flux(w, &op, &sys.grid, &config.dividing_surface, config.flux)?);
        populations.push((0..w.n_surfaces).map(|s| w.surface_population(s)).collect());
        Ok(())
    })?;
    let integrated_flux = trapezoid(&times, &j)?;
    let reactant_density = 1.0 - q[0];
    let k = if reactant_density > 0.0 && times.len() > 1 { Some(nqd_rate(&times, &j, reactant_density)?) } else { None };
    let summary = NqdSummary {
        q_initial: q[0],
        q_final: *q.last().expect("initial point recorded"),
        delta_q: q[q.len() - 1] - q[0],
        integrated_flux,
        reactant_density,
        k,
        norm_drift: (last.norm() - 1.0).abs(),
        energy_initial: wp.energy(&op),
        energy_final: last.energy(&op),
        warnings,
    };
    Ok(NqdRun { times, q, j, populations, summary })
}
