//! Python bindings: the main types and operations of the `halfline` crate.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use halfline::acim::{nu_gamma_cylinders, support_intervals, ulam_density, AcimSystem};
use halfline::affine::{coincidence_search, compose, SystemParams};
use halfline::measure::{kolmogorov_distance, Cdf, PointMassMeasure};
use halfline::shift::ShiftMeasure;
use halfline::skew::{contraction_diagnostics, path_average, path_orbit};
use halfline::sphere::sphere_measure;
use halfline::stationary::{
    holder_certificate, moment_oracle, rotation_number, rotation_number_numeric,
    solve_stationary,
};
use halfline::steering::{approx_sequence, exp_targets, steer};
use halfline::word::Word;

fn err(e: halfline::error::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_word(s: &str) -> PyResult<Word> {
    s.parse().map_err(PyValueError::new_err)
}

/// System parameters `(a, b)` with `0 < a < 1 < b`.
#[pyclass(name = "Params", skip_from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: SystemParams,
}

#[pymethods]
impl PyParams {
    #[new]
    fn new(a: f64, b: f64) -> PyResult<Self> {
        Ok(PyParams {
            inner: SystemParams::new(a, b).map_err(err)?,
        })
    }

    /// Exact-rational construction from numerators and denominators.
    #[staticmethod]
    fn exact(an: i64, ad: i64, bn: i64, bd: i64) -> PyResult<Self> {
        Ok(PyParams {
            inner: SystemParams::new_exact(an, ad, bn, bd).map_err(err)?,
        })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    fn __repr__(&self) -> String {
        format!("Params(a={}, b={})", self.inner.a, self.inner.b)
    }
}

/// `(slope, intercept)` of the composite map of a 0/1 word.
#[pyfunction]
fn compose_word(word: &str, params: &PyParams) -> PyResult<(f64, f64)> {
    let map = compose(&parse_word(word)?, &params.inner);
    Ok((map.slope, map.intercept))
}

/// Orbit of `x` under the word's generators, one point per step.
#[pyfunction]
fn orbit(word: &str, x: f64, params: &PyParams) -> PyResult<Vec<f64>> {
    Ok(path_orbit(&parse_word(word)?, x, &params.inner).points)
}

/// Lyapunov exponent of the Bernoulli measure with symbol-0 mass `p`.
#[pyfunction]
fn lyapunov(p: f64, params: &PyParams) -> PyResult<f64> {
    Ok(ShiftMeasure::bernoulli(p).map_err(err)?.lyapunov(&params.inner))
}

/// The stationary measure solved on a compactified grid.
#[pyclass(name = "StationaryMeasure")]
struct PyStationary {
    measure: halfline::measure::GridMeasure,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    iterations: usize,
}

#[pymethods]
impl PyStationary {
    fn cdf(&self, x: f64) -> f64 {
        self.measure.cdf_x(x)
    }

    fn quantile(&self, s: f64) -> f64 {
        self.measure.quantile(s)
    }

    fn moment(&self, order: u32) -> f64 {
        self.measure.moment(order)
    }
}

#[pyfunction]
#[pyo3(signature = (p, params, grid=65536, tol=1e-6))]
fn stationary(p: f64, params: &PyParams, grid: usize, tol: f64) -> PyResult<PyStationary> {
    let sol = solve_stationary(p, &params.inner, grid, tol, 10_000).map_err(err)?;
    Ok(PyStationary {
        measure: sol.measure,
        residual: sol.residual,
        iterations: sol.iterations,
    })
}

/// Closed-form stationary moment (orders 1 and 2).
#[pyfunction]
fn stationary_moment(p: f64, params: &PyParams, order: u32) -> PyResult<f64> {
    moment_oracle(p, &params.inner, order).map_err(err)
}

/// Depth-`n` sphere average at `x` as `(location, weight)` atoms.
#[pyfunction]
fn sphere_avg(p: f64, x: f64, n: u32, params: &PyParams) -> PyResult<Vec<(f64, f64)>> {
    let nu = ShiftMeasure::bernoulli(p).map_err(err)?;
    Ok(sphere_measure(&nu, x, n, &params.inner)
        .map_err(err)?
        .atoms()
        .collect())
}

/// Empirical path-average mean over `n` sampled steps.
#[pyfunction]
fn path_avg_mean(p: f64, x: f64, n: usize, seed: u64, params: &PyParams) -> PyResult<f64> {
    let nu = ShiftMeasure::bernoulli(p).map_err(err)?;
    Ok(path_average(&nu, x, n, seed, &params.inner).mean())
}

/// Sup-CDF distance between two empirical samples.
#[pyfunction]
fn sample_distance(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
    if xs.is_empty() || ys.is_empty() {
        return Err(PyValueError::new_err("need nonempty samples"));
    }
    Ok(kolmogorov_distance(
        &PointMassMeasure::empirical(&xs),
        &PointMassMeasure::empirical(&ys),
    ))
}

/// Word steering `x` into the `epsilon`-ball of `y`, with its landing data.
#[pyfunction]
fn steer_word<'py>(
    py: Python<'py>,
    x: f64,
    y: f64,
    epsilon: f64,
    params: &PyParams,
) -> PyResult<Bound<'py, PyDict>> {
    let r = steer(x, y, epsilon, &params.inner).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("word", r.word.to_string())?;
    d.set_item("value", r.value)?;
    d.set_item("error", r.error)?;
    d.set_item("orbit_min", r.orbit_min)?;
    d.set_item("orbit_max", r.orbit_max)?;
    Ok(d)
}

/// Universal approximation words toward Exp(1) targets; per-element
/// `(word, target, value, error, slope)`.
#[pyfunction]
fn approx_words(
    n: usize,
    seed: u64,
    params: &PyParams,
) -> PyResult<Vec<(String, f64, f64, f64, f64)>> {
    let targets = exp_targets(n, 30.0, seed);
    Ok(approx_sequence(&targets, &params.inner)
        .map_err(err)?
        .into_iter()
        .map(|e| (e.word.to_string(), e.target, e.value, e.error, e.slope))
        .collect())
}

/// Interval lower-bound certificate for `[center - length/2, center + length/2]`.
#[pyfunction]
fn holder_cert<'py>(
    py: Python<'py>,
    center: f64,
    length: f64,
    p: f64,
    params: &PyParams,
) -> PyResult<Bound<'py, PyDict>> {
    let c = holder_certificate(center, length, p, &params.inner).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("word", c.word.to_string())?;
    d.set_item("k", c.k)?;
    d.set_item("m", c.m)?;
    d.set_item("q", c.q)?;
    d.set_item("image", (c.image_lo, c.image_hi))?;
    d.set_item("length_bound_holds", c.length_bound_holds())?;
    Ok(d)
}

/// Rotation number of the comparison circle map: `(formula, numeric)`.
#[pyfunction]
#[pyo3(signature = (params, iters=1_000_000))]
fn rotation(params: &PyParams, iters: usize) -> PyResult<(f64, f64)> {
    Ok((
        rotation_number(&params.inner),
        rotation_number_numeric(&params.inner, iters),
    ))
}

/// Exact coincidence classes up to `max_len` as
/// `(slope, intercept, [words])`; requires exact parameters.
#[pyfunction]
fn coincidences(max_len: u32, params: &PyParams) -> PyResult<Vec<(f64, f64, Vec<String>)>> {
    Ok(coincidence_search(max_len, &params.inner)
        .map_err(err)?
        .into_iter()
        .map(|c| {
            let map = c.map.to_float();
            (
                map.slope,
                map.intercept,
                c.words.iter().map(|w| w.to_string()).collect(),
            )
        })
        .collect())
}

/// Ulam invariant density of the interval map at threshold `gamma`.
#[pyfunction]
#[pyo3(signature = (gamma, params, bins=1024))]
fn acim<'py>(py: Python<'py>, gamma: f64, params: &PyParams, bins: usize) -> PyResult<Bound<'py, PyDict>> {
    let sys = AcimSystem::new(params.inner.clone(), gamma).map_err(err)?;
    let density = ulam_density(&sys, bins, 20_000).map_err(err)?;
    let report = support_intervals(&density, 1e-3).map_err(err)?;
    let table = nu_gamma_cylinders(&sys, &density, 1, 1_000_000, 7).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("lo", sys.lo)?;
    d.set_item("hi", sys.hi)?;
    d.set_item("mass", density.mass.clone())?;
    d.set_item("residual", density.residual)?;
    d.set_item(
        "support",
        report
            .intervals
            .iter()
            .map(|iv| (iv.left, iv.right, iv.mass))
            .collect::<Vec<_>>(),
    )?;
    d.set_item("lyapunov", table.lyapunov(&sys.params))?;
    Ok(d)
}

/// Per-step `(log_distance, metric_distance)` table of two coupled orbits.
#[pyfunction]
fn contraction_table(
    x: f64,
    y: f64,
    word: &str,
    params: &PyParams,
) -> PyResult<Vec<(f64, f64)>> {
    let diag = contraction_diagnostics(x, y, &parse_word(word)?, &params.inner);
    Ok(diag
        .steps
        .iter()
        .map(|s| (s.log_distance, s.metric_distance))
        .collect())
}

#[pymodule]
fn halfline_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyStationary>()?;
    m.add_function(wrap_pyfunction!(compose_word, m)?)?;
    m.add_function(wrap_pyfunction!(orbit, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov, m)?)?;
    m.add_function(wrap_pyfunction!(stationary, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_moment, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_avg, m)?)?;
    m.add_function(wrap_pyfunction!(path_avg_mean, m)?)?;
    m.add_function(wrap_pyfunction!(sample_distance, m)?)?;
    m.add_function(wrap_pyfunction!(steer_word, m)?)?;
    m.add_function(wrap_pyfunction!(approx_words, m)?)?;
    m.add_function(wrap_pyfunction!(holder_cert, m)?)?;
    m.add_function(wrap_pyfunction!(rotation, m)?)?;
    m.add_function(wrap_pyfunction!(coincidences, m)?)?;
    m.add_function(wrap_pyfunction!(acim, m)?)?;
    m.add_function(wrap_pyfunction!(contraction_table, m)?)?;
    Ok(())
}
