//! Python module `cmvscatter`: sequences, direct scattering, recovery, and the
//! condition checkers. Complex values cross the boundary as Python `complex`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use cmvscatter::cmv::VerblunskySequence;
use cmvscatter::conditions::{self, DiscreteDiskMeasure, Trend};
use cmvscatter::direct::{self, DirectResult as CoreDirect, ScatteringData as CoreData};
use cmvscatter::fixtures;
use cmvscatter::fm::{duality_identity_check, uniqueness_check, FmContext, OuterTransmission};
use cmvscatter::geometry::C64;
use cmvscatter::inverse;
use cmvscatter::io::{parse_json, to_json, ScatteringDoc, SequenceDoc};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Sequence", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySequence(VerblunskySequence);

#[pymethods]
impl PySequence {
    #[new]
    #[pyo3(signature = (window_lo, values, tail_left, tail_right))]
    fn new(window_lo: i64, values: Vec<C64>, tail_left: C64, tail_right: C64) -> PyResult<Self> {
        VerblunskySequence::new(window_lo, values, tail_left, tail_right).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn constant(a: C64) -> PyResult<Self> {
        fixtures::constant(a).map(Self).map_err(value_err)
    }

    /// Seeded random window around `a`.
    #[staticmethod]
    #[pyo3(signature = (a = C64::new(0.5, 0.0), count = 3, seed = 7, amplitude = fixtures::PERTURB_AMPLITUDE))]
    fn perturbed(a: C64, count: usize, seed: u64, amplitude: f64) -> PyResult<Self> {
        fixtures::random_window(a, count, seed, amplitude).map(Self).map_err(value_err)
    }

    /// One-entry step with one bound state.
    #[staticmethod]
    fn step() -> Self {
        Self(fixtures::step())
    }

    #[staticmethod]
    fn edge_resonant() -> Self {
        Self(fixtures::edge_resonant())
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc: SequenceDoc = parse_json(text).map_err(value_err)?;
        doc.to_sequence().map(Self).map_err(value_err)
    }

    fn to_json(&self) -> String {
        to_json(&SequenceDoc::from(&self.0))
    }

    #[getter]
    fn window_lo(&self) -> i64 {
        self.0.window_lo()
    }

    #[getter]
    fn window_hi(&self) -> i64 {
        self.0.window_hi()
    }

    #[getter]
    fn values(&self) -> Vec<C64> {
        self.0.values().to_vec()
    }

    #[getter]
    fn tail_left(&self) -> C64 {
        self.0.tail_left()
    }

    #[getter]
    fn tail_right(&self) -> C64 {
        self.0.tail_right()
    }

    #[getter]
    fn xi0(&self) -> f64 {
        self.0.geometry().xi0
    }

    fn __getitem__(&self, n: i64) -> C64 {
        self.0.get(n)
    }

    fn __repr__(&self) -> String {
        format!("Sequence(window=[{}, {}], tail_left={}, tail_right={})", self.0.window_lo(), self.0.window_hi(), self.0.tail_left(), self.0.tail_right())
    }
}

#[pyclass(name = "ScatteringData", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyData(CoreData);

#[pymethods]
impl PyData {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc: ScatteringDoc = parse_json(text).map_err(value_err)?;
        doc.to_data().map(Self).map_err(value_err)
    }

    fn to_json(&self) -> String {
        to_json(&ScatteringDoc::from(&self.0))
    }

    #[getter]
    fn xi0(&self) -> f64 {
        self.0.xi0
    }

    #[getter]
    fn phase_c_plus(&self) -> f64 {
        self.0.phase_c_plus
    }

    #[getter]
    fn angles(&self) -> Vec<f64> {
        (0..self.0.grid.len()).map(|j| self.0.grid.angle(j)).collect()
    }

    #[getter]
    fn r_plus(&self) -> Vec<C64> {
        self.0.r_plus.clone()
    }

    /// `(ζ_k, ν₊(ζ_k))` pairs.
    #[getter]
    fn masses(&self) -> Vec<(f64, f64)> {
        self.0.masses.iter().map(|m| (m.zeta, m.nu)).collect()
    }

    /// Duality residual and both uniqueness residuals at basis degree `basis`.
    #[pyo3(signature = (basis = 32))]
    fn identity_residuals(&self, basis: usize) -> PyResult<(f64, f64, f64)> {
        let d = &self.0;
        let plus = FmContext::from_data(d, basis).map_err(value_err)?;
        let outer = OuterTransmission::from_data(d).map_err(value_err)?;
        let minus = FmContext::from_data(&outer.dual_data(d), basis).map_err(value_err)?;
        let dual = duality_identity_check(&plus, &minus, &outer).map_err(value_err)?;
        let (up, um) = uniqueness_check(&plus, &minus, &outer).map_err(value_err)?;
        Ok((dual, up, um))
    }
}

#[pyclass(name = "DirectResult", frozen)]
struct PyDirect(CoreDirect);

#[pymethods]
impl PyDirect {
    #[getter]
    fn data(&self) -> PyData {
        PyData(self.0.data.clone())
    }

    #[getter]
    fn t_plus(&self) -> Vec<C64> {
        self.0.smatrix.t_plus.clone()
    }

    #[getter]
    fn t_minus(&self) -> Vec<C64> {
        self.0.smatrix.t_minus.clone()
    }

    #[getter]
    fn r_minus(&self) -> Vec<C64> {
        self.0.smatrix.r_minus.clone()
    }

    fn unitarity_defect(&self) -> f64 {
        self.0.smatrix.unitarity_defect()
    }

    fn symmetry_defect(&self) -> f64 {
        self.0.smatrix.symmetry_defect()
    }

    /// `(ζ_k, ν₊, ν₋, relative product defect)` per bound state.
    #[getter]
    fn norming(&self) -> Vec<(f64, f64, f64, f64)> {
        self.0.norming.iter().map(|n| (n.zeta, n.nu_plus, n.nu_minus, n.product_defect)).collect()
    }

    /// `T₊(z)` anywhere in the closed disk.
    fn transmission(&self, z: C64) -> C64 {
        self.0.solver.t_plus(z)
    }
}

#[pyfunction]
#[pyo3(signature = (seq, grid = 2048))]
fn direct_scattering(seq: &PySequence, grid: usize) -> PyResult<PyDirect> {
    direct::direct_scattering(&seq.0, grid).map(PyDirect).map_err(value_err)
}

/// `a_0, …, a_shifts` from scattering data.
#[pyfunction]
#[pyo3(signature = (data, shifts = 12, basis = 32))]
fn recover_verblunsky(data: &PyData, shifts: usize, basis: usize) -> PyResult<Vec<C64>> {
    inverse::recover_verblunsky(&data.0, shifts, basis).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (data, n_lo, n_hi, basis = 32))]
fn recover_sequence(data: &PyData, n_lo: i64, n_hi: i64, basis: usize) -> PyResult<PySequence> {
    inverse::recover_sequence(&data.0, n_lo, n_hi, basis).map(PySequence).map_err(value_err)
}

fn trend_name(t: Trend) -> &'static str {
    match t {
        Trend::Stable => "stable",
        Trend::Divergent => "divergent",
        Trend::Undetermined => "undetermined",
    }
}

/// A2 values of `|x|^alpha` on `[-2, 2]` per refinement level, with the trend.
#[pyfunction]
#[pyo3(signature = (alpha, levels = 8))]
fn power_weight_a2(alpha: f64, levels: usize) -> PyResult<(Vec<f64>, &'static str)> {
    let s = conditions::a2_study(&fixtures::power_weight(alpha), levels).map_err(value_err)?;
    Ok((s.values, trend_name(s.trend)))
}

#[pyfunction]
fn modified_a2_reflection(samples: Vec<C64>) -> PyResult<f64> {
    conditions::modified_a2_reflection(&samples, 0.0).map_err(value_err)
}

#[pyfunction]
fn carleson_box(points: Vec<C64>, masses: Vec<f64>) -> PyResult<f64> {
    if points.len() != masses.len() {
        return Err(PyValueError::new_err("points and masses differ in length"));
    }
    Ok(conditions::carleson_box(&DiscreteDiskMeasure { points, masses }))
}

/// Condition report for a sequence as a JSON string (grids `M, 2M, 4M`).
#[pyfunction]
#[pyo3(signature = (seq, grid = 512, levels = 8))]
fn classify_sequence(seq: &PySequence, grid: usize, levels: usize) -> PyResult<String> {
    conditions::classify_sequence(&seq.0, grid, levels).map(|r| to_json(&r)).map_err(value_err)
}

#[pymodule]
#[pyo3(name = "cmvscatter")]
fn cmvscatter_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySequence>()?;
    m.add_class::<PyData>()?;
    m.add_class::<PyDirect>()?;
    m.add_function(wrap_pyfunction!(direct_scattering, m)?)?;
    m.add_function(wrap_pyfunction!(recover_verblunsky, m)?)?;
    m.add_function(wrap_pyfunction!(recover_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(power_weight_a2, m)?)?;
    m.add_function(wrap_pyfunction!(modified_a2_reflection, m)?)?;
    m.add_function(wrap_pyfunction!(carleson_box, m)?)?;
    m.add_function(wrap_pyfunction!(classify_sequence, m)?)?;
    Ok(())
}
