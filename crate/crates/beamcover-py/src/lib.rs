//! Python surface: geometries, thresholds, coverage bounds, codebook
//! refinement, verification, and the sweep simulator. Thin wrappers over
//! the Rust types; all angles degrees, gains linear unless suffixed _db.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use beamcover::array::{ArrayKind, Direction, PhaseShifterSpec};
use beamcover::coverage::CoverageRegion;
use beamcover::refine::{build_candidates, greedy_cover_1d, greedy_cover_2d, VisibilityGrid};

fn err(e: beamcover::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(frozen, name = "ArrayGeometry")]
struct PyArrayGeometry {
    inner: beamcover::ArrayGeometry,
}

#[pymethods]
impl PyArrayGeometry {
    /// Uniform linear array with n elements spaced d_over_lambda apart.
    #[staticmethod]
    fn ula(n: usize, d_over_lambda: f64) -> PyResult<Self> {
        Ok(Self { inner: beamcover::ArrayGeometry::ula(n, d_over_lambda).map_err(err)? })
    }

    /// Uniform rectangular array, n1 x n2 elements.
    #[staticmethod]
    #[pyo3(signature = (n1, n2, d1_over_lambda, d2_over_lambda=None))]
    fn ura(n1: usize, n2: usize, d1_over_lambda: f64, d2_over_lambda: Option<f64>) -> PyResult<Self> {
        let d2 = d2_over_lambda.unwrap_or(d1_over_lambda);
        Ok(Self { inner: beamcover::ArrayGeometry::ura(n1, n2, d1_over_lambda, d2).map_err(err)? })
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind.to_string()
    }

    #[getter]
    fn n1(&self) -> usize {
        self.inner.n1
    }

    #[getter]
    fn n2(&self) -> usize {
        self.inner.n2
    }

    #[getter]
    fn d1_over_lambda(&self) -> f64 {
        self.inner.d1_over_lambda
    }

    #[getter]
    fn d2_over_lambda(&self) -> f64 {
        self.inner.d2_over_lambda
    }

    #[getter]
    fn elements(&self) -> usize {
        self.inner.elements()
    }

    #[getter]
    fn max_gain(&self) -> f64 {
        self.inner.max_gain()
    }

    fn grating_lobe_free(&self, max_steer_deg: f64) -> bool {
        self.inner.grating_lobe_free(max_steer_deg)
    }

    fn __repr__(&self) -> String {
        match self.inner.kind {
            ArrayKind::Ula => format!(
                "ArrayGeometry.ula({}, {})",
                self.inner.n1, self.inner.d1_over_lambda
            ),
            ArrayKind::Ura => format!(
                "ArrayGeometry.ura({}, {}, {}, {})",
                self.inner.n1, self.inner.n2, self.inner.d1_over_lambda, self.inner.d2_over_lambda
            ),
        }
    }
}

#[pyclass(frozen, name = "Threshold")]
struct PyThreshold {
    inner: beamcover::ThresholdSpec,
}

#[pymethods]
impl PyThreshold {
    /// Allowed gain loss in dB.
    #[staticmethod]
    fn from_db(gamma_db: f64) -> PyResult<Self> {
        Ok(Self { inner: beamcover::ThresholdSpec::from_db(gamma_db).map_err(err)? })
    }

    /// Allowed gain-loss factor (linear, > 1).
    #[staticmethod]
    fn from_linear(gamma_f: f64) -> PyResult<Self> {
        Ok(Self { inner: beamcover::ThresholdSpec::from_linear(gamma_f).map_err(err)? })
    }

    #[getter]
    fn gamma_db(&self) -> f64 {
        self.inner.gamma_db()
    }

    #[getter]
    fn gamma_f(&self) -> f64 {
        self.inner.gamma_f()
    }

    #[getter]
    fn min_ratio(&self) -> f64 {
        self.inner.min_ratio()
    }

    fn __repr__(&self) -> String {
        format!("Threshold.from_db({})", self.inner.gamma_db())
    }
}

#[pyclass(frozen, name = "AxisBounds")]
struct PyAxisBounds {
    #[pyo3(get)]
    l_delta_deg: f64,
    #[pyo3(get)]
    u_delta_deg: f64,
    #[pyo3(get)]
    l_clamped: bool,
    #[pyo3(get)]
    u_clamped: bool,
}

impl From<beamcover::AxisBounds> for PyAxisBounds {
    fn from(b: beamcover::AxisBounds) -> Self {
        Self {
            l_delta_deg: b.l_delta_deg,
            u_delta_deg: b.u_delta_deg,
            l_clamped: b.l_clamped,
            u_clamped: b.u_clamped,
        }
    }
}

#[pymethods]
impl PyAxisBounds {
    fn __repr__(&self) -> String {
        format!(
            "AxisBounds(l_delta_deg={}, u_delta_deg={}, l_clamped={}, u_clamped={})",
            self.l_delta_deg, self.u_delta_deg, self.l_clamped, self.u_clamped
        )
    }
}

/// Gain ratio D for a ULA steered to theta, observed at theta + delta.
#[pyfunction]
fn degradation_ula(geom: &PyArrayGeometry, theta_deg: f64, delta_deg: f64) -> PyResult<f64> {
    beamcover::degradation_ula(&geom.inner, theta_deg, delta_deg).map_err(err)
}

/// Gain ratio D for a URA, per-axis deviations.
#[pyfunction]
fn degradation_ura(
    geom: &PyArrayGeometry,
    theta_x_deg: f64,
    theta_y_deg: f64,
    delta_x_deg: f64,
    delta_y_deg: f64,
) -> PyResult<f64> {
    beamcover::degradation_ura(&geom.inner, theta_x_deg, theta_y_deg, delta_x_deg, delta_y_deg)
        .map_err(err)
}

/// ULA phase-budget root: returns (alpha_star, residual).
#[pyfunction]
fn alpha_star_ula(threshold: &PyThreshold) -> PyResult<(f64, f64)> {
    let a = beamcover::alpha_star_ula(&threshold.inner).map_err(err)?;
    Ok((a.value, a.residual))
}

/// URA phase-budget root: returns (alpha_star, residual).
#[pyfunction]
fn alpha_star_ura(threshold: &PyThreshold) -> PyResult<(f64, f64)> {
    let a = beamcover::alpha_star_ura(&threshold.inner).map_err(err)?;
    Ok((a.value, a.residual))
}

/// Closed-form coverage interval of a ULA beam steered to theta.
#[pyfunction]
fn delta_bounds_ula(
    geom: &PyArrayGeometry,
    theta_deg: f64,
    threshold: &PyThreshold,
) -> PyResult<PyAxisBounds> {
    match beamcover::delta_bounds_ula(&geom.inner, theta_deg, &threshold.inner).map_err(err)? {
        CoverageRegion::Line(b) => Ok(b.into()),
        CoverageRegion::Rect { .. } => unreachable!("ULA bounds are a line interval"),
    }
}

/// Closed-form coverage rectangle of a URA beam: (x bounds, y bounds).
#[pyfunction]
fn delta_bounds_ura(
    geom: &PyArrayGeometry,
    theta_x_deg: f64,
    theta_y_deg: f64,
    threshold: &PyThreshold,
) -> PyResult<(PyAxisBounds, PyAxisBounds)> {
    match beamcover::delta_bounds_ura(&geom.inner, theta_x_deg, theta_y_deg, &threshold.inner)
        .map_err(err)?
    {
        CoverageRegion::Rect { x, y } => Ok((x.into(), y.into())),
        CoverageRegion::Line(_) => unreachable!("URA bounds are a rectangle"),
    }
}

/// Unit-power steering weights for a pointing direction, optionally
/// quantized to `bits`-bit phase shifters.
#[pyfunction]
#[pyo3(signature = (geom, theta_deg, theta_y_deg=None, bits=None))]
fn steering_weights(
    geom: &PyArrayGeometry,
    theta_deg: f64,
    theta_y_deg: Option<f64>,
    bits: Option<u32>,
) -> PyResult<Vec<Complex64>> {
    let dir = match (geom.inner.kind, theta_y_deg) {
        (ArrayKind::Ula, None) => Direction::ula(theta_deg).map_err(err)?,
        (ArrayKind::Ura, Some(ty)) => Direction::ura(theta_deg, ty).map_err(err)?,
        (ArrayKind::Ula, Some(_)) => {
            return Err(PyValueError::new_err("theta_y_deg is for URA geometries"))
        }
        (ArrayKind::Ura, None) => {
            return Err(PyValueError::new_err("URA geometries need theta_y_deg"))
        }
    };
    let mut v = beamcover::optimal_steering(&geom.inner, &dir).map_err(err)?;
    if let Some(bits) = bits {
        let spec = PhaseShifterSpec::bits(bits).map_err(err)?;
        v = beamcover::quantize_steering(&v, spec);
    }
    Ok(v.weights)
}

#[pyclass(frozen, name = "CoverReport")]
struct PyCoverReport {
    #[pyo3(get)]
    n_points: usize,
    #[pyo3(get)]
    min_ratio: f64,
    #[pyo3(get)]
    fraction_meeting: f64,
    #[pyo3(get)]
    argmin: Option<(f64, Option<f64>)>,
}

#[pymethods]
impl PyCoverReport {
    fn __repr__(&self) -> String {
        format!(
            "CoverReport(n_points={}, min_ratio={}, fraction_meeting={})",
            self.n_points, self.min_ratio, self.fraction_meeting
        )
    }
}

#[pyclass(frozen, name = "SweepSummary")]
struct PySweepSummary {
    #[pyo3(get)]
    n_trials: usize,
    #[pyo3(get)]
    gamma_db: f64,
    #[pyo3(get)]
    fraction_within_gamma: f64,
    #[pyo3(get)]
    max_gap_db: f64,
    #[pyo3(get)]
    cdf: Vec<(f64, f64)>,
}

#[pymethods]
impl PySweepSummary {
    fn __repr__(&self) -> String {
        format!(
            "SweepSummary(n_trials={}, fraction_within_gamma={}, max_gap_db={})",
            self.n_trials, self.fraction_within_gamma, self.max_gap_db
        )
    }
}

fn direction_tuple(dir: &Direction) -> (f64, Option<f64>) {
    match *dir {
        Direction::Ula { theta_deg } => (theta_deg, None),
        Direction::Ura { theta_x_deg, theta_y_deg } => (theta_x_deg, Some(theta_y_deg)),
    }
}

#[pyclass(frozen, name = "Codebook")]
struct PyCodebook {
    cb: beamcover::RefinedCodebook,
    grid: VisibilityGrid,
}

#[pymethods]
impl PyCodebook {
    fn __len__(&self) -> usize {
        self.cb.len()
    }

    #[getter]
    fn fingerprint(&self) -> String {
        self.cb.fingerprint.clone()
    }

    /// Pointing angles, one tuple (theta, theta_y or None) per entry.
    #[getter]
    fn pointings(&self) -> Vec<(f64, Option<f64>)> {
        self.cb.entries.iter().map(|e| direction_tuple(&e.pointing)).collect()
    }

    /// Coverage region of one entry: AxisBounds for a ULA, a pair for a URA.
    fn bounds(&self, py: Python<'_>, index: usize) -> PyResult<Py<PyAny>> {
        let e = self
            .cb
            .entries
            .get(index)
            .ok_or_else(|| PyValueError::new_err(format!("entry {index} out of range")))?;
        match &e.region {
            CoverageRegion::Line(b) => {
                Ok(PyAxisBounds::from(*b).into_pyobject(py)?.into_any().unbind())
            }
            CoverageRegion::Rect { x, y } => Ok((PyAxisBounds::from(*x), PyAxisBounds::from(*y))
                .into_pyobject(py)?
                .into_any()
                .unbind()),
        }
    }

    /// Exhaustive grid audit of the gain-ratio floor.
    #[pyo3(signature = (quantize_bits=None))]
    fn verify(&self, quantize_bits: Option<u32>) -> PyResult<PyCoverReport> {
        let spec = match quantize_bits {
            None => None,
            Some(b) => Some(PhaseShifterSpec::bits(b).map_err(err)?),
        };
        let r = beamcover::verify_cover(
            &self.cb,
            &self.cb.geometry,
            &self.grid,
            &self.cb.threshold,
            spec,
        )
        .map_err(err)?;
        Ok(PyCoverReport {
            n_points: r.n_points,
            min_ratio: r.min_ratio,
            fraction_meeting: r.fraction_meeting,
            argmin: r.argmin.as_ref().map(direction_tuple),
        })
    }

    /// Monte-Carlo beam sweep; deterministic for a given seed.
    #[pyo3(signature = (n_trials, seed=0, noise_std_db=None))]
    fn sweep(&self, n_trials: u64, seed: u64, noise_std_db: Option<f64>) -> PyResult<PySweepSummary> {
        let r = beamcover::run_sweep(
            &self.cb,
            &self.cb.geometry,
            &self.grid,
            n_trials,
            seed,
            noise_std_db,
        )
        .map_err(err)?;
        let max_gap_db = r.trials.iter().map(|t| t.gap_db).fold(f64::MIN, f64::max);
        Ok(PySweepSummary {
            n_trials: r.trials.len(),
            gamma_db: r.gamma_db,
            fraction_within_gamma: r.fraction_within_gamma,
            max_gap_db,
            cdf: r.cdf,
        })
    }

    fn __repr__(&self) -> String {
        format!("Codebook(size={}, fingerprint={:?})", self.cb.len(), self.cb.fingerprint)
    }
}

/// Greedy minimal covering codebook over a visibility grid.
#[pyfunction]
#[pyo3(signature = (geom, threshold, min_deg=-60.0, max_deg=60.0, step_deg=None,
                    min2_deg=None, max2_deg=None, step2_deg=None, candidate_step_deg=None))]
#[allow(clippy::too_many_arguments)]
fn refine_codebook(
    geom: &PyArrayGeometry,
    threshold: &PyThreshold,
    min_deg: f64,
    max_deg: f64,
    step_deg: Option<f64>,
    min2_deg: Option<f64>,
    max2_deg: Option<f64>,
    step2_deg: Option<f64>,
    candidate_step_deg: Option<f64>,
) -> PyResult<PyCodebook> {
    let grid = match geom.inner.kind {
        ArrayKind::Ula => {
            if min2_deg.is_some() || max2_deg.is_some() || step2_deg.is_some() {
                return Err(PyValueError::new_err("second-axis arguments are for URA geometries"));
            }
            VisibilityGrid::line(min_deg, max_deg, step_deg.unwrap_or(0.1)).map_err(err)?
        }
        ArrayKind::Ura => {
            let step1 = step_deg.unwrap_or(0.5);
            VisibilityGrid::plane(
                min_deg,
                max_deg,
                step1,
                min2_deg.unwrap_or(min_deg),
                max2_deg.unwrap_or(max_deg),
                step2_deg.unwrap_or(step1),
            )
            .map_err(err)?
        }
    };
    let set = build_candidates(&geom.inner, &grid, &threshold.inner, candidate_step_deg)
        .map_err(err)?;
    let cb = match geom.inner.kind {
        ArrayKind::Ula => greedy_cover_1d(&set, &grid).map_err(err)?,
        ArrayKind::Ura => greedy_cover_2d(&set, &grid).map_err(err)?,
    };
    Ok(PyCodebook { cb, grid })
}

#[pymodule]
fn beamcover_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyArrayGeometry>()?;
    m.add_class::<PyThreshold>()?;
    m.add_class::<PyAxisBounds>()?;
    m.add_class::<PyCodebook>()?;
    m.add_class::<PyCoverReport>()?;
    m.add_class::<PySweepSummary>()?;
    m.add_function(wrap_pyfunction!(degradation_ula, m)?)?;
    m.add_function(wrap_pyfunction!(degradation_ura, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_star_ula, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_star_ura, m)?)?;
    m.add_function(wrap_pyfunction!(delta_bounds_ula, m)?)?;
    m.add_function(wrap_pyfunction!(delta_bounds_ura, m)?)?;
    m.add_function(wrap_pyfunction!(steering_weights, m)?)?;
    m.add_function(wrap_pyfunction!(refine_codebook, m)?)?;
    Ok(())
}
