//! Python bindings. Reports come back as plain dicts and lists.

use std::path::PathBuf;

use aperiodica::autocorr::{self, AtomicMeasure, DEFAULT_CLUSTER_TOL};
use aperiodica::cutproject::{self, CutProjectScheme, SchemeConfig, Window, WindowSpec};
use aperiodica::diffraction::{self, DiffractionSpectrum, SpectrumMethod};
use aperiodica::io;
use aperiodica::pointset::{self, MeyerOptions};
use aperiodica::substitution::{self, ColouredPointSet, SubstitutionRule};
use num_complex::Complex64;
use pyo3::conversion::IntoPyObjectExt;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

/// `(physical, internal, integer index)`.
type Lift = (Vec<f64>, Vec<f64>, Vec<i64>);

create_exception!(aperiodica, AperiodicaError, PyException, "Raised for errors from the core library.");

fn err(e: aperiodica::Error) -> PyErr {
    AperiodicaError::new_err(format!("{}: {e}", e.name()))
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for aperiodica::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    match v {
        Value::Null => py.None().into_bound_py_any(py),
        Value::Bool(b) => b.into_bound_py_any(py),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_bound_py_any(py),
            (None, Some(f)) => f.into_bound_py_any(py),
            _ => n.as_u64().into_bound_py_any(py),
        },
        Value::String(s) => s.into_bound_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_bound_py_any(py)
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_bound_py_any(py)
        }
    }
}

fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

fn parse_method(name: &str) -> PyResult<SpectrumMethod> {
    match name {
        "empirical" => Ok(SpectrumMethod::Empirical),
        "analytic" => Ok(SpectrumMethod::Analytic),
        "smoothed" => Ok(SpectrumMethod::Smoothed),
        other => Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
}

#[pyclass(name = "PointSet", module = "aperiodica", frozen)]
struct PyPointSet {
    inner: pointset::PointSet,
}

#[pymethods]
impl PyPointSet {
    #[new]
    #[pyo3(signature = (points, sample_radius, label = None))]
    fn new(points: Vec<Vec<f64>>, sample_radius: f64, label: Option<String>) -> PyResult<Self> {
        let dim = points.first().map_or(1, Vec::len);
        Ok(PyPointSet { inner: pointset::PointSet::new(dim, points, sample_radius, label).py_err()? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyPointSet { inner: io::load_points(&path).py_err()? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_points(&path, &self.inner).py_err()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn sample_radius(&self) -> f64 {
        self.inner.sample_radius()
    }

    #[getter]
    fn label(&self) -> Option<String> {
        self.inner.label().map(str::to_owned)
    }

    #[getter]
    fn density(&self) -> f64 {
        self.inner.density()
    }

    #[getter]
    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    /// Points in canonical (lexicographic) order.
    fn points(&self) -> Vec<Vec<f64>> {
        self.inner.to_vecs()
    }

    fn restrict(&self, radius: f64) -> PyResult<Self> {
        Ok(PyPointSet { inner: self.inner.restrict(radius).py_err()? })
    }

    fn translate(&self, t: Vec<f64>) -> PyResult<Self> {
        Ok(PyPointSet { inner: self.inner.translate(&t).py_err()? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "PointSet(dim={}, len={}, sample_radius={}, label={:?})",
            self.inner.dim(),
            self.inner.len(),
            self.inner.sample_radius(),
            self.inner.label()
        )
    }
}

/// A cut-and-project scheme together with its window.
#[pyclass(name = "Scheme", module = "aperiodica", frozen)]
struct PyScheme {
    scheme: CutProjectScheme,
    window: Window,
}

#[pymethods]
impl PyScheme {
    /// `basis` is row-major with the lattice generators as columns;
    /// `window` is the JSON window object, e.g. `{"shape": "ball", ...}`.
    #[new]
    fn new(basis: Vec<Vec<f64>>, physical_dim: usize, internal_dim: usize, window: &str) -> PyResult<Self> {
        let window: WindowSpec = serde_json::from_str(window).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let cfg = SchemeConfig { physical_dim, internal_dim, basis, window };
        let (scheme, window) = cfg.build().py_err()?;
        Ok(PyScheme { scheme, window })
    }

    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        let p = cutproject::preset(name).py_err()?;
        Ok(PyScheme { scheme: p.scheme, window: p.window })
    }

    #[staticmethod]
    fn preset_names() -> Vec<&'static str> {
        cutproject::PRESET_NAMES.to_vec()
    }

    #[getter]
    fn physical_dim(&self) -> usize {
        self.scheme.physical_dim()
    }

    #[getter]
    fn internal_dim(&self) -> usize {
        self.scheme.internal_dim()
    }

    #[getter]
    fn haar_scale(&self) -> f64 {
        self.scheme.haar_scale()
    }

    fn window_volume(&self) -> f64 {
        self.window.volume()
    }

    fn window_density(&self) -> f64 {
        self.scheme.window_density(&self.window)
    }

    fn window_fourier(&self, k: Vec<f64>) -> PyResult<Complex64> {
        self.window.fourier(&k).py_err()
    }

    /// `(x, x*)` for an integer coordinate vector.
    fn star(&self, index: Vec<i64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        self.scheme.star(&index).py_err()
    }

    fn generate(&self, py: Python<'_>, radius: f64) -> PyResult<PyPointSet> {
        let ps = py.detach(|| self.scheme.generate_model_set(&self.window, radius)).py_err()?;
        Ok(PyPointSet { inner: ps })
    }

    /// `(x, x*, index)` for every point of the model set in `B_radius`.
    fn lifted(&self, radius: f64) -> PyResult<Vec<Lift>> {
        let pts = self.scheme.generate_lifted(&self.window, radius).py_err()?;
        Ok(pts.into_iter().map(|l| (l.physical, l.internal, l.index)).collect())
    }

    /// `(k, k*, index)` for reciprocal points with `|k| <= k_radius`.
    fn reciprocal_points(&self, k_radius: f64, index_bound: i64) -> Vec<Lift> {
        self.scheme
            .reciprocal_points(k_radius, index_bound)
            .into_iter()
            .map(|r| (r.k, r.k_star, r.integer_index))
            .collect()
    }

    #[pyo3(signature = (k_radius, index_bound = 30, floor = 0.0))]
    fn analytic_diffraction(&self, py: Python<'_>, k_radius: f64, index_bound: i64, floor: f64) -> PyResult<PySpectrum> {
        let s = py.detach(|| self.scheme.analytic_diffraction(&self.window, k_radius, index_bound, floor)).py_err()?;
        Ok(PySpectrum { inner: s })
    }
}

#[pyclass(name = "Spectrum", module = "aperiodica", frozen)]
struct PySpectrum {
    inner: DiffractionSpectrum,
}

#[pymethods]
impl PySpectrum {
    #[staticmethod]
    #[pyo3(signature = (path, method = "empirical"))]
    fn load(path: PathBuf, method: &str) -> PyResult<Self> {
        Ok(PySpectrum { inner: io::load_spectrum_csv(&path, parse_method(method)?).py_err()? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_spectrum_csv(&path, &self.inner).py_err()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension
    }

    #[getter]
    fn method(&self) -> &'static str {
        match self.inner.method {
            SpectrumMethod::Empirical => "empirical",
            SpectrumMethod::Analytic => "analytic",
            SpectrumMethod::Smoothed => "smoothed",
        }
    }

    #[getter]
    fn sample_radius_used(&self) -> Option<f64> {
        self.inner.sample_radius_used
    }

    fn wave_vectors(&self) -> Vec<Vec<f64>> {
        self.inner.peaks.iter().map(|p| p.k.clone()).collect()
    }

    fn intensities(&self) -> Vec<f64> {
        self.inner.peaks.iter().map(|p| p.intensity).collect()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.peaks.iter().map(|p| p.amplitude).collect()
    }

    fn indices(&self) -> Vec<Option<Vec<i64>>> {
        self.inner.peaks.iter().map(|p| p.index.clone()).collect()
    }

    fn strongest(&self, count: usize) -> Self {
        PySpectrum { inner: self.inner.strongest(count) }
    }

    fn max_intensity(&self) -> f64 {
        self.inner.max_intensity()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Spectrum(method={:?}, dimension={}, peaks={})", self.method(), self.inner.dimension, self.inner.len())
    }
}

#[pyclass(name = "Measure", module = "aperiodica", frozen)]
struct PyMeasure {
    inner: AtomicMeasure,
}

#[pymethods]
impl PyMeasure {
    #[staticmethod]
    fn load(path: PathBuf, normalization_volume: f64, diff_cutoff: f64, cluster_tol: f64) -> PyResult<Self> {
        let meta = io::MeasureMeta { normalization_volume, diff_cutoff, cluster_tol };
        Ok(PyMeasure { inner: io::load_measure_csv(&path, &meta).py_err()? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_measure_csv(&path, &self.inner).py_err()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension
    }

    #[getter]
    fn normalization_volume(&self) -> f64 {
        self.inner.normalization_volume
    }

    #[getter]
    fn diff_cutoff(&self) -> f64 {
        self.inner.diff_cutoff
    }

    #[getter]
    fn cluster_tol(&self) -> f64 {
        self.inner.cluster_tol
    }

    fn positions(&self) -> Vec<Vec<f64>> {
        self.inner.atoms.iter().map(|a| a.position.clone()).collect()
    }

    fn weights(&self) -> Vec<f64> {
        self.inner.atoms.iter().map(|a| a.weight).collect()
    }

    fn pair_counts(&self) -> Vec<u64> {
        self.inner.atoms.iter().map(|a| a.pair_count).collect()
    }

    fn total_weight(&self) -> f64 {
        self.inner.total_weight()
    }

    fn weight_near(&self, z: Vec<f64>, tol: f64) -> f64 {
        self.inner.weight_near(&z, tol)
    }

    fn __len__(&self) -> usize {
        self.inner.atoms.len()
    }
}

#[pyclass(name = "SubstitutionRule", module = "aperiodica", frozen)]
struct PyRule {
    inner: SubstitutionRule,
}

#[pymethods]
impl PyRule {
    /// `rules` maps each single-character symbol to its image, in
    /// alphabet order, e.g. `[("a", "ab"), ("b", "a")]`.
    #[new]
    #[pyo3(signature = (rules, lengths = None))]
    fn new(rules: Vec<(char, String)>, lengths: Option<Vec<f64>>) -> PyResult<Self> {
        let pairs: Vec<(char, &str)> = rules.iter().map(|(c, s)| (*c, s.as_str())).collect();
        let mut rule = SubstitutionRule::new(&pairs).py_err()?;
        if let Some(l) = lengths {
            rule = rule.with_lengths(l).py_err()?;
        }
        Ok(PyRule { inner: rule })
    }

    #[getter]
    fn alphabet(&self) -> Vec<char> {
        self.inner.alphabet().to_vec()
    }

    #[getter]
    fn lengths(&self) -> Vec<f64> {
        self.inner.lengths().to_vec()
    }

    #[getter]
    fn eigenvalue(&self) -> f64 {
        self.inner.eigenvalue()
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        self.inner.matrix()
    }

    fn letter_frequencies(&self) -> PyResult<Vec<f64>> {
        self.inner.letter_frequencies().py_err()
    }

    fn expand(&self, seed: char, iterations: usize) -> PyResult<String> {
        let word = self.inner.expand(seed, iterations).py_err()?;
        Ok(word.into_iter().map(|i| self.inner.alphabet()[i]).collect())
    }

    #[pyo3(signature = (seed, iterations, origin = 0.0))]
    fn generate(&self, seed: char, iterations: usize, origin: f64) -> PyResult<PyColoured> {
        let cs = substitution::generate_substitution_points(&self.inner, seed, iterations, origin).py_err()?;
        Ok(PyColoured { inner: cs })
    }
}

#[pyclass(name = "ColouredPointSet", module = "aperiodica", frozen)]
struct PyColoured {
    inner: ColouredPointSet,
}

#[pymethods]
impl PyColoured {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyColoured { inner: io::load_coloured(&path).py_err()? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_coloured(&path, &self.inner).py_err()
    }

    fn positions(&self) -> Vec<f64> {
        self.inner.positions().to_vec()
    }

    fn colours(&self) -> Vec<char> {
        self.inner.colours.clone()
    }

    fn points(&self) -> PyPointSet {
        PyPointSet { inner: self.inner.points.clone() }
    }

    fn match_model_set<'py>(&self, py: Python<'py>, ps: &PyPointSet, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &substitution::match_model_set(&self.inner, &ps.inner, tol).py_err()?)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
fn perron_data<'py>(py: Python<'py>, rule: &PyRule) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &substitution::perron_data(&rule.inner))
}

#[pyfunction]
#[pyo3(signature = (ps, probe_spacing = 0.05))]
fn delone_report<'py>(py: Python<'py>, ps: &PyPointSet, probe_spacing: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &pointset::delone_report(&ps.inner, probe_spacing).py_err()?)
}

#[pyfunction]
fn difference_set(ps: &PyPointSet, cutoff: f64) -> PyResult<PyPointSet> {
    Ok(PyPointSet { inner: pointset::difference_set(&ps.inner, cutoff).py_err()? })
}

#[pyfunction]
#[pyo3(signature = (ps, cutoff, gap_threshold = None, f_max = 64))]
fn meyer_check<'py>(
    py: Python<'py>,
    ps: &PyPointSet,
    cutoff: f64,
    gap_threshold: Option<f64>,
    f_max: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let mut opts = MeyerOptions { f_max, ..MeyerOptions::default() };
    if let Some(g) = gap_threshold {
        opts.gap_threshold = g;
    }
    to_py(py, &pointset::meyer_check(&ps.inner, cutoff, opts).py_err()?)
}

#[pyfunction]
fn almost_period_defect(ps: &PyPointSet, t: Vec<f64>, guard: f64) -> PyResult<f64> {
    pointset::almost_period_defect(&ps.inner, &t, guard).py_err()
}

#[pyfunction]
fn statistical_almost_periods(
    ps: &PyPointSet,
    epsilon: f64,
    candidates: Vec<Vec<f64>>,
    guard: f64,
) -> PyResult<Vec<Vec<f64>>> {
    pointset::statistical_almost_periods(&ps.inner, epsilon, &candidates, guard).py_err()
}

#[pyfunction]
fn poisson_sample(dim: usize, density: f64, radius: f64, seed: u64) -> PyResult<PyPointSet> {
    Ok(PyPointSet { inner: pointset::poisson_sample(dim, density, radius, seed).py_err()? })
}

#[pyfunction]
fn lattice_sample(dim: usize, spacing: f64, radius: f64) -> PyResult<PyPointSet> {
    Ok(PyPointSet { inner: pointset::lattice_sample(dim, spacing, radius).py_err()? })
}

#[pyfunction]
#[pyo3(signature = (ps, cutoff, cluster_tol = DEFAULT_CLUSTER_TOL))]
fn autocorrelation(py: Python<'_>, ps: &PyPointSet, cutoff: f64, cluster_tol: f64) -> PyResult<PyMeasure> {
    let g = py.detach(|| autocorr::autocorrelation(&ps.inner, cutoff, cluster_tol)).py_err()?;
    Ok(PyMeasure { inner: g })
}

#[pyfunction]
#[pyo3(signature = (small, large, cutoff, cluster_tol = DEFAULT_CLUSTER_TOL))]
fn convergence_report(small: &PyPointSet, large: &PyPointSet, cutoff: f64, cluster_tol: f64) -> PyResult<f64> {
    autocorr::convergence_report(&small.inner, &large.inner, cutoff, cluster_tol).py_err()
}

#[pyfunction]
fn empirical_amplitude(ps: &PyPointSet, xi: Vec<f64>) -> PyResult<Complex64> {
    diffraction::empirical_amplitude(&ps.inner, &xi).py_err()
}

#[pyfunction]
#[pyo3(signature = (ps, candidates, floor = 0.0))]
fn empirical_spectrum(py: Python<'_>, ps: &PyPointSet, candidates: Vec<Vec<f64>>, floor: f64) -> PyResult<PySpectrum> {
    let s = py.detach(|| diffraction::empirical_spectrum(&ps.inner, &candidates, floor)).py_err()?;
    Ok(PySpectrum { inner: s })
}

/// Returns `(k, intensity)` of the local maximum near `xi0`.
#[pyfunction]
fn refine_peak(ps: &PyPointSet, xi0: Vec<f64>, search_radius: f64) -> PyResult<(Vec<f64>, f64)> {
    let r = diffraction::refine_peak(&ps.inner, &xi0, search_radius).py_err()?;
    Ok((r.k, r.intensity))
}

#[pyfunction]
#[pyo3(signature = (samples, candidates, stability_tol, floor = 0.0))]
fn bragg_scan(
    samples: Vec<PyRef<'_, PyPointSet>>,
    candidates: Vec<Vec<f64>>,
    stability_tol: f64,
    floor: f64,
) -> PyResult<PySpectrum> {
    let sets: Vec<pointset::PointSet> = samples.iter().map(|p| p.inner.clone()).collect();
    Ok(PySpectrum { inner: diffraction::bragg_scan(&sets, &candidates, stability_tol, floor).py_err()? })
}

/// Returns `[(k, value), ...]`; the width defaults to a quarter of the
/// measure's cutoff.
#[pyfunction]
#[pyo3(signature = (gamma, k_grid, damping_width = None))]
fn smoothed_transform(
    gamma: &PyMeasure,
    k_grid: Vec<Vec<f64>>,
    damping_width: Option<f64>,
) -> PyResult<Vec<(Vec<f64>, f64)>> {
    let width = damping_width.unwrap_or(gamma.inner.diff_cutoff / 4.0);
    diffraction::smoothed_transform(&gamma.inner, &k_grid, width).py_err()
}

#[pyfunction]
fn compare_spectra<'py>(py: Python<'py>, a: &PySpectrum, b: &PySpectrum, k_match_tol: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &diffraction::compare_spectra(&a.inner, &b.inner, k_match_tol).py_err()?)
}

#[pyfunction]
#[pyo3(signature = (spectrum, min_intensity, k_radius, probe_spacing = 0.1))]
fn peak_gap_bound(spectrum: &PySpectrum, min_intensity: f64, k_radius: f64, probe_spacing: f64) -> PyResult<f64> {
    diffraction::peak_gap_bound(&spectrum.inner, min_intensity, k_radius, probe_spacing).py_err()
}

#[pymodule]
#[pyo3(name = "aperiodica")]
fn aperiodica_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", aperiodica::VERSION)?;
    m.add("AperiodicaError", m.py().get_type::<AperiodicaError>())?;
    m.add_class::<PyPointSet>()?;
    m.add_class::<PyScheme>()?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PyMeasure>()?;
    m.add_class::<PyRule>()?;
    m.add_class::<PyColoured>()?;
    m.add_function(wrap_pyfunction!(perron_data, m)?)?;
    m.add_function(wrap_pyfunction!(delone_report, m)?)?;
    m.add_function(wrap_pyfunction!(difference_set, m)?)?;
    m.add_function(wrap_pyfunction!(meyer_check, m)?)?;
    m.add_function(wrap_pyfunction!(almost_period_defect, m)?)?;
    m.add_function(wrap_pyfunction!(statistical_almost_periods, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_sample, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_sample, m)?)?;
    m.add_function(wrap_pyfunction!(autocorrelation, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_report, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(refine_peak, m)?)?;
    m.add_function(wrap_pyfunction!(bragg_scan, m)?)?;
    m.add_function(wrap_pyfunction!(smoothed_transform, m)?)?;
    m.add_function(wrap_pyfunction!(compare_spectra, m)?)?;
    m.add_function(wrap_pyfunction!(peak_gap_bound, m)?)?;
    Ok(())
}
