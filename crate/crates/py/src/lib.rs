//! Python bindings: grids, catalogue superpotentials, the metric pipeline,
//! the residual suite and the spectral-singularity probe.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::sync::Arc;
use susy_eta::grid::HalfLineGrid;
use susy_eta::metric::{run_pipeline, spectral_singularity_probe};
use susy_eta::spectral::{eta_state, KGrid};
use susy_eta::transformation::{catalogue, CatalogueParams, TransformationFunction};
use susy_eta::verify::{run_suite, SuiteConfig};

fn err(e: susy_eta::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// serde value -> plain Python objects via `json.loads`.
fn to_py<T: serde::Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Uniform grid `x_j = j X / (n - 1)` on `[0, X]`.
#[pyclass(name = "Grid", frozen)]
struct PyGrid {
    inner: Arc<HalfLineGrid>,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(x_max: f64, n: usize) -> PyResult<Self> {
        Ok(PyGrid {
            inner: Arc::new(HalfLineGrid::new(x_max, n).map_err(err)?),
        })
    }

    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes().to_vec()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.inner.spacing()
    }

    #[getter]
    fn x_max(&self) -> f64 {
        self.inner.x_max()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Grid(x_max={}, n={})", self.inner.x_max(), self.inner.len())
    }
}

/// Catalogue entry `u` together with its superpotential `w = u'/u`.
#[pyclass(name = "Superpotential", frozen)]
struct PySuperpotential {
    entry: String,
    params: CatalogueParams,
    u: TransformationFunction,
    w: susy_eta::transformation::Superpotential,
    grid: Arc<HalfLineGrid>,
}

#[pymethods]
impl PySuperpotential {
    #[new]
    #[pyo3(signature = (entry, grid, d, b, a = 1.0, c = 1.0))]
    fn new(entry: &str, grid: &PyGrid, d: f64, b: f64, a: f64, c: f64) -> PyResult<Self> {
        let params = CatalogueParams { d, b, a, c };
        let u = catalogue(entry, params).map_err(err)?;
        let w = susy_eta::transformation::Superpotential::from_transformation(&u, &grid.inner).map_err(err)?;
        Ok(PySuperpotential {
            entry: entry.to_string(),
            params,
            u,
            w,
            grid: grid.inner.clone(),
        })
    }

    #[getter]
    fn alpha(&self) -> Complex64 {
        self.w.alpha()
    }

    fn u(&self, x: f64) -> Complex64 {
        self.u.u(x)
    }

    fn w(&self, x: f64) -> Complex64 {
        self.w.w(x)
    }

    /// Complex potential of `H`.
    fn v(&self, x: f64) -> Complex64 {
        self.w.v(x)
    }

    /// Real potential of the Hermitian partner of `H`.
    fn v_bar(&self, x: f64) -> f64 {
        self.w.v_bar(x)
    }

    fn v_bar0(&self, x: f64) -> f64 {
        self.w.v_bar0(x)
    }

    /// `(eigenvalue, values on the grid)` of the eta scattering state with momentum `k`.
    fn eta_state(&self, k: f64) -> PyResult<(Complex64, Vec<Complex64>)> {
        let st = eta_state(&self.u, &self.w, k, &self.grid).map_err(err)?;
        Ok((st.eigenvalue(), st.values().values().to_vec()))
    }

    /// Summary numbers of the dense metric pipeline as a dict.
    fn pipeline_report(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let p = run_pipeline(&self.w, &self.grid).map_err(err)?;
        to_py(py, &p.report)
    }

    /// Dense `eta` as a list of rows.
    fn eta_matrix(&self) -> PyResult<Vec<Vec<Complex64>>> {
        let m = susy_eta::metric::assemble_eta_matrix(&self.w, &self.grid).map_err(err)?;
        let e = m.entries();
        Ok((0..e.nrows()).map(|i| e.row(i).iter().copied().collect()).collect())
    }

    /// Residual suite; list of check dicts.
    #[pyo3(signature = (seed = 7, n_tests = 20, matrix = true))]
    fn run_suite(&self, py: Python<'_>, seed: u64, n_tests: usize, matrix: bool) -> PyResult<Py<PyAny>> {
        let cfg = SuiteConfig {
            seed,
            n_tests,
            matrix,
            k_grid: KGrid::default(),
            ..SuiteConfig::default()
        };
        let checks = run_suite(&self.entry, self.params, &self.grid, &cfg).map_err(err)?;
        to_py(py, &checks)
    }
}

/// cond(rho), r_h and resolvent agreement along `d_sequence`.
#[pyfunction]
#[pyo3(signature = (entry, grid, d_sequence, b, a = 1.0, c = 1.0))]
fn probe(py: Python<'_>, entry: &str, grid: &PyGrid, d_sequence: Vec<f64>, b: f64, a: f64, c: f64) -> PyResult<Py<PyAny>> {
    let base = CatalogueParams { d: d_sequence.first().copied().unwrap_or(-1.0), b, a, c };
    let rep = spectral_singularity_probe(entry, base, &d_sequence, &grid.inner).map_err(err)?;
    to_py(py, &rep)
}

#[pymodule]
fn susy_eta_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PySuperpotential>()?;
    m.add_function(wrap_pyfunction!(probe, m)?)?;
    Ok(())
}
