//! Python bindings: Pauli operators, fermion and grid encodings, resource
//! estimates and the NQD driver. Structured results come back as plain
//! Python dicts.

use std::path::Path;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use qcat::fermion::{sector_ground_state_encoded, Encoding, IntegralFile};
use qcat::kernels::{ground_states, EigenOptions};
use qcat::nuclear::{binary_map, build_dvr_hamiltonian, direct_map};
use qcat::resources::{fci_dimension as fci, QubitKind, ResourceReport};

create_exception!(qcat_py, QcatError, PyException);

fn err(e: qcat::Error) -> PyErr {
    QcatError::new_err(format!("{}: {e}", e.kind()))
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| err(e.into()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: serde::de::DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| err(e.into()))
}

fn encoding(name: &str) -> PyResult<Encoding> {
    name.parse().map_err(err)
}

#[pyclass(module = "qcat_py", frozen)]
pub struct PauliOperator {
    inner: qcat::PauliOperator,
}

#[pymethods]
impl PauliOperator {
    /// Terms as `(label, coefficient)` pairs, e.g. `("X0 Z2", 0.5)`.
    #[staticmethod]
    fn from_labels(n_qubits: usize, terms: Vec<(String, f64)>) -> PyResult<Self> {
        let refs: Vec<(&str, f64)> = terms.iter().map(|(l, c)| (l.as_str(), *c)).collect();
        Ok(PauliOperator { inner: qcat::PauliOperator::from_labels(n_qubits, &refs).map_err(err)? })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PauliOperator { inner: qcat::PauliOperator::from_text(text).map_err(err)? })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    fn __len__(&self) -> usize {
        self.inner.num_terms()
    }

    fn terms(&self) -> Vec<(String, Complex64)> {
        self.inner.iter().map(|(s, c)| (s.dense_label(), *c)).collect()
    }

    fn is_hermitian(&self, tol: f64) -> bool {
        self.inner.is_hermitian(tol)
    }

    fn multiply(&self, other: &PauliOperator) -> PyResult<PauliOperator> {
        Ok(PauliOperator { inner: self.inner.multiply(&other.inner).map_err(err)? })
    }

    /// Lowest `k` eigenvalues by Lanczos.
    #[pyo3(signature = (k = 1, tol = 1e-10))]
    fn eigenvalues(&self, k: usize, tol: f64) -> PyResult<Vec<f64>> {
        let m = self.inner.to_matrix().map_err(err)?;
        Ok(ground_states(&m, k, tol).map_err(err)?.eigenvalues)
    }

    /// Weight histogram, Trotter gate counts and term statistics.
    #[pyo3(signature = (mapping = "operator"))]
    fn resources<'py>(&self, py: Python<'py>, mapping: &str) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &ResourceReport::new(mapping, &self.inner, None).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!("PauliOperator(n_qubits={}, terms={})", self.inner.n_qubits(), self.inner.num_terms())
    }
}

#[pyclass(module = "qcat_py", frozen)]
pub struct MolecularHamiltonian {
    inner: qcat::fermion::MolecularHamiltonian,
}

#[pymethods]
impl MolecularHamiltonian {
    #[staticmethod]
    fn from_fcidump(path: &str) -> PyResult<Self> {
        let f = IntegralFile::read(Path::new(path)).map_err(err)?;
        Ok(MolecularHamiltonian { inner: qcat::fermion::MolecularHamiltonian::from_integrals(&f).map_err(err)? })
    }

    #[staticmethod]
    fn from_fcidump_text(text: &str) -> PyResult<Self> {
        let f = IntegralFile::parse(text).map_err(err)?;
        Ok(MolecularHamiltonian { inner: qcat::fermion::MolecularHamiltonian::from_integrals(&f).map_err(err)? })
    }

    /// Two-site Hubbard model at half filling.
    #[staticmethod]
    fn hubbard_dimer(t: f64, u: f64) -> Self {
        MolecularHamiltonian { inner: qcat::fermion::MolecularHamiltonian::hubbard_dimer(t, u) }
    }

    #[getter]
    fn n_spin_orbitals(&self) -> usize {
        self.inner.n_spin_orbitals
    }

    #[getter]
    fn n_electrons(&self) -> usize {
        self.inner.n_electrons
    }

    /// Mapping is one of `jw`, `bk`, `parity`.
    #[pyo3(signature = (mapping = "jw"))]
    fn to_qubit_operator(&self, mapping: &str) -> PyResult<PauliOperator> {
        Ok(PauliOperator { inner: self.inner.to_qubit_operator(encoding(mapping)?).map_err(err)? })
    }

    /// Ground energy in the Hamiltonian's own electron-number sector.
    #[pyo3(signature = (mapping = "jw", tol = 1e-10))]
    fn ground_energy(&self, mapping: &str, tol: f64) -> PyResult<f64> {
        let g = sector_ground_state_encoded(&self.inner, self.inner.n_electrons, encoding(mapping)?, &EigenOptions::new(1, tol), None)
            .map_err(err)?;
        Ok(g.energy)
    }
}

#[pyclass(module = "qcat_py", frozen)]
pub struct DvrSystem {
    inner: qcat::nuclear::DvrSystem,
}

#[pymethods]
impl DvrSystem {
    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(DvrSystem { inner: qcat::nuclear::DvrSystem::read(path).map_err(err)? })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(DvrSystem { inner: qcat::nuclear::DvrSystem::parse(text).map_err(err)? })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.inner.n_points()
    }

    #[getter]
    fn n_surfaces(&self) -> usize {
        self.inner.n_surfaces()
    }

    #[pyo3(signature = (surface = 0, k = 1, tol = 1e-10))]
    fn eigenvalues(&self, surface: usize, k: usize, tol: f64) -> PyResult<Vec<f64>> {
        let h = build_dvr_hamiltonian(&self.inner, surface).map_err(err)?;
        Ok(ground_states(&h, k, tol).map_err(err)?.eigenvalues)
    }

    #[pyo3(signature = (surface = 0))]
    fn binary_map(&self, surface: usize) -> PyResult<PauliOperator> {
        Ok(PauliOperator { inner: binary_map(&self.inner, surface).map_err(err)? })
    }

    #[pyo3(signature = (surface = 0))]
    fn direct_map(&self, surface: usize) -> PyResult<PauliOperator> {
        Ok(PauliOperator { inner: direct_map(&self.inner, surface).map_err(err)? })
    }

    /// Runs the NQD driver. `config` uses the same keys as the CLI's JSON config.
    fn run_nqd<'py>(&self, py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyDict>> {
        let config: qcat::nqd::NqdConfig = from_py(config)?;
        let run = py.detach(|| qcat::nqd::run_nqd(&self.inner, &config)).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("times", run.times)?;
        out.set_item("q", run.q)?;
        out.set_item("j", run.j)?;
        out.set_item("populations", run.populations)?;
        out.set_item("summary", to_py(py, &run.summary)?)?;
        Ok(out)
    }
}

/// `kind` is a dict such as `{"kind": "dvr_binary", "dims": 15, "points": 256}`.
#[pyfunction]
fn qubit_count(kind: &Bound<'_, PyAny>) -> PyResult<usize> {
    let kind: QubitKind = from_py(kind)?;
    qcat::resources::qubit_count(kind).map_err(err)
}

#[pyfunction]
fn fci_dimension<'py>(py: Python<'py>, n_alpha: u64, n_beta: u64, n_orbitals: u64) -> PyResult<Bound<'py, PyAny>> {
    let digits = fci(n_alpha, n_beta, n_orbitals).map_err(err)?.to_string();
    py.import("builtins")?.getattr("int")?.call1((digits,))
}

#[pyfunction]
fn requirements_summary(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &qcat::resources::requirements_summary().map_err(err)?)
}

/// Ranks catalysts from a pathway manifest file.
#[pyfunction]
fn run_pathways<'py>(py: Python<'py>, manifest: &str) -> PyResult<Bound<'py, PyAny>> {
    let path = Path::new(manifest);
    let m = qcat::pathway::PathwayManifest::read(path).map_err(err)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let reports = py.detach(|| qcat::pathway::run_pathways(&m, base)).map_err(err)?;
    to_py(py, &reports)
}

/// Runs the command-line tool in-process and returns its exit code.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> i32 {
    let mut argv = vec!["qcat".to_string()];
    argv.extend(args);
    py.detach(|| qcat::workflow::run_cli(argv))
}

#[pymodule]
fn qcat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QcatError", m.py().get_type::<QcatError>())?;
    m.add_class::<PauliOperator>()?;
    m.add_class::<MolecularHamiltonian>()?;
    m.add_class::<DvrSystem>()?;
    m.add_function(wrap_pyfunction!(qubit_count, m)?)?;
    m.add_function(wrap_pyfunction!(fci_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(requirements_summary, m)?)?;
    m.add_function(wrap_pyfunction!(run_pathways, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
