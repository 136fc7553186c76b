//! Python bindings: a thin layer over `scri` returning plain Python values.

use std::collections::HashMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use scri::geometry::{make_kerr_exterior, validate_model};
use scri::indexsets::{resonance_sets as resonance_sets_rs, IndexSet};
use scri::run::{self, ConvergenceConfig, ExtractionConfig, RunConfig};
use scri::solver::{exact_minkowski_oracle, GridSpec, NullChart, SourceSpec};
use scri::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Precondition(_) | Error::InvalidModel(_) | Error::Cfl(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

type Entry = (String, f64, f64, u32);
type Sets = HashMap<&'static str, Vec<Entry>>;
type Row = (f64, f64, f64, Option<f64>);
type Slice = (f64, Vec<f64>, Vec<f64>);

fn entries(set: &IndexSet) -> Vec<Entry> {
    set.entries().iter().map(|e| (e.z.to_string(), e.z.re(), e.z.im(), e.k)).collect()
}

fn source(amplitude: f64) -> SourceSpec {
    SourceSpec { amplitude, ..SourceSpec::default() }
}

#[pyfunction]
fn version() -> String {
    run::version_stamp()
}

/// Boundary constants `m, omega, alpha, beta` of Kerr with mass and spin.
#[pyfunction]
#[pyo3(signature = (mass, spin = 0.0))]
fn kerr_constants(mass: f64, spin: f64) -> PyResult<HashMap<&'static str, f64>> {
    let r = make_kerr_exterior(mass, spin).and_then(|m| validate_model(&m)).map_err(to_py)?;
    let c = r.constants;
    Ok(HashMap::from([("m", c.m), ("omega", c.omega), ("alpha", c.alpha), ("beta", c.beta)]))
}

/// `E_res0`, `E_res` and `E_scri` for resonances given as `"re,im,k"`.
/// Entries come back as `(label, re, im, k)`.
#[pyfunction]
#[pyo3(signature = (e0, m_nonzero = true, depth = 3.5))]
fn resonance_sets(e0: Vec<String>, m_nonzero: bool, depth: f64) -> PyResult<Sets> {
    if !(depth > 0.0) {
        return Err(PyValueError::new_err("depth must be positive"));
    }
    let e0 = run::parse_e0(&e0).map_err(to_py)?;
    let s = resonance_sets_rs(&e0, m_nonzero, depth);
    Ok(HashMap::from([("e_res0", entries(&s.e_res0)), ("e_res", entries(&s.e_res)), ("e_scri", entries(&s.e_scri))]))
}

/// Exact Minkowski solution `u(t, r)` for the default source scaled by
/// `amplitude`.
#[pyfunction]
#[pyo3(signature = (points, amplitude = 1.0))]
fn minkowski_exact(py: Python<'_>, points: Vec<(f64, f64)>, amplitude: f64) -> PyResult<Vec<f64>> {
    py.detach(|| exact_minkowski_oracle(&source(amplitude), &points)).map_err(to_py)
}

/// Grid refinement against the exact solution: `(dr, max_abs_error,
/// rel_error, order)` per grid.
#[pyfunction]
#[pyo3(signature = (drs, t_eval = 30.0, r_step = 0.25, r_max = 45.0))]
fn convergence(py: Python<'_>, drs: Vec<f64>, t_eval: f64, r_step: f64, r_max: f64) -> PyResult<Vec<Row>> {
    let cfg = ConvergenceConfig { drs, t_eval, r_step, r_max, ..ConvergenceConfig::default() };
    let st = py.detach(|| run::convergence_study(&SourceSpec::default(), &cfg)).map_err(to_py)?;
    Ok(st.rows.iter().map(|r| (r.dr, r.max_abs_error, r.rel_error, r.order)).collect())
}

/// Radiation field on tortoise slices `s = 2(t - r*)`, `rho = 1/r`, for
/// `s = s_min, s_min + ds, ..., <= s_max`: `(s, rho, w)` per slice.
#[pyfunction]
#[pyo3(signature = (mass, s_min, s_max, ds, rho_min = 1e-3, rho_max = 1e-2, dr = 0.0625))]
#[allow(clippy::too_many_arguments)]
fn tortoise_slices(
    py: Python<'_>,
    mass: f64,
    s_min: f64,
    s_max: f64,
    ds: f64,
    rho_min: f64,
    rho_max: f64,
    dr: f64,
) -> PyResult<Vec<Slice>> {
    if !(ds > 0.0 && s_max >= s_min && rho_min > 0.0 && rho_max > rho_min) {
        return Err(PyValueError::new_err("need ds > 0, s_max >= s_min and 0 < rho_min < rho_max"));
    }
    let ex = ExtractionConfig { chart: NullChart::Tortoise, s_min, s_max, ds, rho_min, rho_max, per_octave: 4 };
    let grid = GridSpec { dr, t_end: 0.0, ..GridSpec::default() };
    let (_, slices) = py.detach(|| run::solve_slices(mass, &SourceSpec::default(), &grid, &ex, 0)).map_err(to_py)?;
    Ok(slices.into_iter().map(|sl| (sl.s, sl.rho, sl.w)).collect())
}

/// Acceptance criteria with the default configuration: `(id, name,
/// passed, detail)`. Takes about a minute.
#[pyfunction]
fn verify(py: Python<'_>) -> Vec<(u32, String, bool, String)> {
    py.detach(|| run::verify::run_criteria(&RunConfig::default()))
        .into_iter()
        .map(|c| (c.id, c.name, c.passed, c.detail))
        .collect()
}

#[pyfunction]
fn default_config() -> String {
    run::default_config_toml()
}

#[pymodule]
fn scri_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(version, m)?)?;
    m.add_function(wrap_pyfunction!(kerr_constants, m)?)?;
    m.add_function(wrap_pyfunction!(resonance_sets, m)?)?;
    m.add_function(wrap_pyfunction!(minkowski_exact, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add_function(wrap_pyfunction!(tortoise_slices, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    Ok(())
}
