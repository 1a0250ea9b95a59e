//! Python bindings: `import rectfree_py`.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use rectfree::convolution;
use rectfree::infdiv;
use rectfree::nc;
use rectfree::randmat::{self, EnsembleConfig};
use rectfree::{ContourConfig, Error};

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// A symmetric probability measure: atoms plus a piecewise-linear density.
#[pyclass(name = "SymmetricMeasure", module = "rectfree_py")]
#[derive(Clone)]
struct PySymmetricMeasure(rectfree::SymmetricMeasure);

#[pymethods]
impl PySymmetricMeasure {
    #[new]
    #[pyo3(signature = (atoms=Vec::new(), grid=Vec::new(), density=Vec::new()))]
    fn new(atoms: Vec<(f64, f64)>, grid: Vec<f64>, density: Vec<f64>) -> PyResult<Self> {
        let file = rectfree::measures::MeasureFile { atoms: atoms.into_iter().map(|(x, m)| [x, m]).collect(), grid, density };
        rectfree::SymmetricMeasure::from_file(file).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        rectfree::SymmetricMeasure::from_json(text).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn bernoulli() -> Self {
        Self(rectfree::SymmetricMeasure::bernoulli())
    }

    #[staticmethod]
    fn dirac_zero() -> Self {
        Self(rectfree::SymmetricMeasure::dirac_zero())
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn moment(&self, k: u32) -> f64 {
        self.0.moment(k)
    }

    fn density_at(&self, x: f64) -> f64 {
        self.0.density_at(x)
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        self.0.atoms().to_vec()
    }

    /// `(grid, values)` of the density part, empty when there is none.
    fn density(&self) -> (Vec<f64>, Vec<f64>) {
        self.0.density().map_or((Vec::new(), Vec::new()), |d| (d.grid().to_vec(), d.values().to_vec()))
    }

    fn total_mass(&self) -> f64 {
        self.0.total_mass()
    }

    fn __repr__(&self) -> String {
        let n = self.0.density().map_or(0, |d| d.len());
        format!("SymmetricMeasure({} atoms, {n} density nodes)", self.0.atoms().len())
    }
}

/// A finite symmetric Lévy measure.
#[pyclass(name = "LevyMeasure", module = "rectfree_py")]
#[derive(Clone)]
struct PyLevyMeasure(rectfree::LevyMeasure);

#[pymethods]
impl PyLevyMeasure {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        rectfree::LevyMeasure::from_json(text).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn dirac_zero(mass: f64) -> PyResult<Self> {
        rectfree::LevyMeasure::dirac_zero(mass).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn symmetric_pair(x: f64, w: f64) -> PyResult<Self> {
        rectfree::LevyMeasure::symmetric_pair(x, w).map(Self).map_err(to_py)
    }

    fn add(&self, other: &Self) -> PyResult<Self> {
        self.0.add(&other.0).map(Self).map_err(to_py)
    }

    fn total_mass(&self) -> f64 {
        self.0.total_mass()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }
}

#[pyfunction]
fn rect_convolve(mu: &PySymmetricMeasure, nu: &PySymmetricMeasure, lambda: f64) -> PyResult<PySymmetricMeasure> {
    convolution::rect_convolve(&mu.0, &nu.0, lambda, &ContourConfig::default()).map(PySymmetricMeasure).map_err(to_py)
}

#[pyfunction]
fn rect_convolve_power(mu: &PySymmetricMeasure, lambda: f64, k: u32) -> PyResult<PySymmetricMeasure> {
    convolution::rect_convolve_power(&mu.0, lambda, k, &ContourConfig::default()).map(PySymmetricMeasure).map_err(to_py)
}

#[pyfunction]
fn bercovici_pata(levy: &PyLevyMeasure, lambda: f64) -> PyResult<PySymmetricMeasure> {
    infdiv::bercovici_pata(&levy.0, lambda, &ContourConfig::default()).map(PySymmetricMeasure).map_err(to_py)
}

#[pyfunction]
fn rect_gaussian(lambda: f64) -> PyResult<PySymmetricMeasure> {
    infdiv::rect_gaussian(lambda).map(PySymmetricMeasure).map_err(to_py)
}

#[pyfunction]
fn rect_cauchy(lambda: f64, t: f64) -> PyResult<PySymmetricMeasure> {
    infdiv::rect_cauchy(lambda, t).map(|r| PySymmetricMeasure(r.0)).map_err(to_py)
}

#[pyfunction]
fn rect_poisson(lambda: f64, c: f64) -> PyResult<PySymmetricMeasure> {
    infdiv::rect_poisson(lambda, c, &ContourConfig::default()).map(PySymmetricMeasure).map_err(to_py)
}

#[pyfunction]
fn moments_from_rect_cumulants(lambda: f64, cumulants: Vec<f64>) -> PyResult<Vec<f64>> {
    nc::moments_from_rect_cumulants(lambda, &cumulants).map_err(to_py)
}

#[pyfunction]
fn rect_cumulants_from_moments(lambda: f64, moments: Vec<f64>) -> PyResult<Vec<f64>> {
    nc::rect_cumulants_from_moments(lambda, &moments).map_err(to_py)
}

#[pyfunction]
fn mp_moment(a: f64, n: usize) -> PyResult<f64> {
    nc::mp_moment(a, n).map_err(to_py)
}

/// Noncrossing partitions of `1..=n` as lists of blocks.
#[pyfunction]
fn noncrossing_partitions(n: usize) -> PyResult<Vec<Vec<Vec<usize>>>> {
    Ok(nc::enumerate_nc(n).map_err(to_py)?.iter().map(|p| p.blocks()).collect())
}

/// Runs a Monte Carlo comparison; `config` is the JSON form of an ensemble
/// configuration. Returns the JSON report.
#[pyfunction]
#[pyo3(signature = (config, target, kmax=4))]
fn mc_compare(py: Python<'_>, config: &str, target: &PySymmetricMeasure, kmax: usize) -> PyResult<String> {
    let cfg: EnsembleConfig = serde_json::from_str(config).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let target = target.0.clone();
    let report = py.allow_threads(move || randmat::mc_compare(&cfg, &target, kmax)).map_err(to_py)?;
    Ok(report.to_json())
}

#[pymodule]
fn rectfree_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySymmetricMeasure>()?;
    m.add_class::<PyLevyMeasure>()?;
    m.add_function(wrap_pyfunction!(rect_convolve, m)?)?;
    m.add_function(wrap_pyfunction!(rect_convolve_power, m)?)?;
    m.add_function(wrap_pyfunction!(bercovici_pata, m)?)?;
    m.add_function(wrap_pyfunction!(rect_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(rect_cauchy, m)?)?;
    m.add_function(wrap_pyfunction!(rect_poisson, m)?)?;
    m.add_function(wrap_pyfunction!(moments_from_rect_cumulants, m)?)?;
    m.add_function(wrap_pyfunction!(rect_cumulants_from_moments, m)?)?;
    m.add_function(wrap_pyfunction!(mp_moment, m)?)?;
    m.add_function(wrap_pyfunction!(noncrossing_partitions, m)?)?;
    m.add_function(wrap_pyfunction!(mc_compare, m)?)?;
    Ok(())
}
