//! Python bindings. Solvers release the GIL while they run.

use hypsorb::eigen::{eigen_dump as dump, find_eigenvalues as find, Branch};
use hypsorb::fdm::{default_lambda, run_fdm as fdm, FdmConfig, Grid};
use hypsorb::series::TimeSeries;
use hypsorb::spectral::{solve_spectral as spectral, SpectralSolution, DEFAULT_MODES};
use hypsorb::validate::{
    audit_conservation as conservation, audit_kinetics as kinetics, compare_engines,
    run_parabolic as parabolic, ComparisonReport, ParabolicConfig, SurfaceClosure, PARABOLIC_RATIO,
};
use hypsorb::{InitialCondition, Params, PhysicalInputs, SampledProfile};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: hypsorb::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Dimensionless parameters `A`, `B`, `L`, `N0`.
#[pyclass(name = "Params", module = "hypsorb", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyParams(Params);

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (A, B, L, N0))]
    #[allow(non_snake_case)]
    fn new(A: f64, B: f64, L: f64, N0: f64) -> PyResult<Self> {
        Params::new(A, B, L, N0).map(PyParams).map_err(err)
    }

    /// Nondimensionalises physical inputs; the slab thickness sets the length scale.
    #[staticmethod]
    fn from_physical(
        thickness: f64,
        diffusivity: f64,
        relaxation_time: f64,
        desorption_time: f64,
        adsorption_rate: f64,
        initial_density: f64,
    ) -> PyResult<Self> {
        let phys = PhysicalInputs {
            thickness,
            diffusivity,
            relaxation_time,
            desorption_time,
            adsorption_rate,
            initial_density,
        };
        Params::from_physical(&phys).map(PyParams).map_err(err)
    }

    #[getter(A)]
    fn a(&self) -> f64 {
        self.0.desorption_time
    }

    #[getter(B)]
    fn b(&self) -> f64 {
        self.0.relaxation_time
    }

    #[getter(L)]
    fn l(&self) -> f64 {
        self.0.adsorption_length
    }

    #[getter(N0)]
    fn n0(&self) -> f64 {
        self.0.initial_density
    }

    /// `(N_eq, σ_eq)`.
    fn equilibrium(&self) -> (f64, f64) {
        self.0.equilibrium()
    }

    fn wave_speed(&self) -> f64 {
        self.0.wave_speed()
    }

    fn alpha_critical(&self) -> f64 {
        self.0.alpha_critical()
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!(
            "Params(A={}, B={}, L={}, N0={})",
            p.desorption_time, p.relaxation_time, p.adsorption_length, p.initial_density
        )
    }
}

/// `"step"`, `"parabolic"`, or a `(z, values)` pair sampled on `[0, 1/2]` or `[-1/2, 1/2]`.
fn initial(arg: Option<&Bound<'_, PyAny>>) -> PyResult<InitialCondition> {
    let Some(arg) = arg else {
        return Ok(InitialCondition::Step);
    };
    if let Ok(name) = arg.extract::<String>() {
        return match name.as_str() {
            "step" => Ok(InitialCondition::Step),
            "parabolic" => Ok(InitialCondition::Parabolic),
            other => Err(PyValueError::new_err(format!(
                "unknown initial condition `{other}`"
            ))),
        };
    }
    let (z, values): (Vec<f64>, Vec<f64>) = arg.extract()?;
    SampledProfile::new(z, values)
        .map(InitialCondition::Sampled)
        .map_err(err)
}

/// Sampled `σ(t)`, surface density and probe densities from one engine.
#[pyclass(name = "TimeSeries", module = "hypsorb", frozen, skip_from_py_object)]
struct PyTimeSeries(TimeSeries);

#[pymethods]
impl PyTimeSeries {
    #[getter]
    fn engine(&self) -> String {
        self.0.engine.to_string()
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times.clone()
    }

    #[getter]
    fn sigma(&self) -> Vec<f64> {
        self.0.sigma.clone()
    }

    #[getter]
    fn surface_density(&self) -> Vec<f64> {
        self.0.surface_density.clone()
    }

    #[getter]
    fn probes(&self) -> Vec<f64> {
        self.0.probes.clone()
    }

    /// `probe_values[j][p]` is the density at probe `p` and time `j`.
    #[getter]
    fn probe_values(&self) -> Vec<Vec<f64>> {
        self.0.probe_values.clone()
    }

    #[getter]
    fn conservation(&self) -> Vec<f64> {
        self.0.conservation.clone()
    }

    fn probe_column(&self, index: usize) -> PyResult<Vec<f64>> {
        if index >= self.0.probes.len() {
            return Err(PyValueError::new_err(format!("no probe {index}")));
        }
        Ok(self.0.probe_column(index))
    }

    /// Linear interpolation in time.
    fn sigma_at(&self, t: f64) -> f64 {
        self.0.sigma_at(t)
    }

    fn max_conservation_residual(&self) -> f64 {
        self.0.max_conservation_residual()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        let (t0, t1) = self.0.time_range().unwrap_or((0.0, 0.0));
        format!(
            "TimeSeries({}, {} points on [{t0}, {t1}])",
            self.0.engine,
            self.0.len()
        )
    }
}

/// Modal solution; evaluate anywhere in `z` and `t`.
#[pyclass(
    name = "SpectralSolution",
    module = "hypsorb",
    frozen,
    skip_from_py_object
)]
struct PySpectral(SpectralSolution);

#[pymethods]
impl PySpectral {
    #[getter]
    fn n_eq(&self) -> f64 {
        self.0.n_eq
    }

    #[getter]
    fn sigma_eq(&self) -> f64 {
        self.0.sigma_eq
    }

    #[getter]
    fn mode_count(&self) -> usize {
        self.0.modes.len()
    }

    fn density(&self, z: f64, t: f64) -> f64 {
        self.0.density(z, t)
    }

    fn density_rate(&self, z: f64, t: f64) -> f64 {
        self.0.density_rate(z, t)
    }

    fn sigma(&self, t: f64) -> f64 {
        self.0.sigma(t)
    }

    fn sigma_rate(&self, t: f64) -> f64 {
        self.0.sigma_rate(t)
    }

    fn bulk_content(&self, t: f64) -> f64 {
        self.0.bulk_content(t)
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues()
    }

    /// `(S1, S2)` per mode.
    fn amplitudes(&self) -> Vec<(Complex64, Complex64)> {
        self.0.modes.iter().map(|m| (m.s1, m.s2)).collect()
    }

    #[pyo3(signature = (times, probes = Vec::new()))]
    fn series(&self, py: Python<'_>, times: Vec<f64>, probes: Vec<f64>) -> PyResult<PyTimeSeries> {
        py.detach(|| self.0.series(&times, &probes, 0))
            .map(PyTimeSeries)
            .map_err(err)
    }

    fn diagnostics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = &self.0.diagnostics;
        let out = PyDict::new(py);
        out.set_item("mode_count", d.mode_count)?;
        out.set_item("orthogonality_residual", d.orthogonality_residual)?;
        out.set_item("initial_l2_residual", d.initial_l2_residual)?;
        out.set_item("initial_centre_error", d.initial_centre_error)?;
        out.set_item("initial_sigma", d.initial_sigma)?;
        Ok(out)
    }
}

/// Deviation between two series on a common time grid.
#[pyclass(
    name = "ComparisonReport",
    module = "hypsorb",
    frozen,
    skip_from_py_object
)]
struct PyReport(ComparisonReport);

#[pymethods]
impl PyReport {
    #[getter]
    fn engines(&self) -> (String, String) {
        (self.0.engines.0.to_string(), self.0.engines.1.to_string())
    }

    #[getter]
    fn sigma_max(&self) -> f64 {
        self.0.sigma_max
    }

    #[getter]
    fn sigma_max_at(&self) -> f64 {
        self.0.sigma_max_at
    }

    #[getter]
    fn sigma_rms(&self) -> f64 {
        self.0.sigma_rms
    }

    #[getter]
    fn points(&self) -> usize {
        self.0.points
    }

    /// `(z, max |ΔN|)` for each shared probe.
    #[getter]
    fn probes(&self) -> Vec<(f64, f64)> {
        self.0.probes.iter().map(|p| (p.z, p.max)).collect()
    }

    /// `max |Δσ| / σ_eq`, when parameters were supplied.
    fn relative_sigma_max(&self) -> Option<f64> {
        self.0.relative_sigma_max()
    }

    fn passes(&self, tolerance: f64) -> Option<bool> {
        self.0.passes(tolerance)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// The first `count` roots of the eigenvalue equation as dicts with
/// `alpha`, `index`, `branch`, `mu1`, `mu2`.
#[pyfunction]
fn find_eigenvalues<'py>(
    py: Python<'py>,
    params: &PyParams,
    count: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let p = params.0;
    let modes = py.detach(|| find(&p, count)).map_err(err)?;
    modes
        .iter()
        .map(|m| {
            let d = PyDict::new(py);
            d.set_item("alpha", m.alpha)?;
            d.set_item("index", m.index)?;
            let branch = match m.branch {
                Branch::F1 => "f1",
                Branch::F2 => "f2",
                Branch::ReE => "re_e",
            };
            d.set_item("branch", branch)?;
            d.set_item("mu1", m.exponents.mu1)?;
            d.set_item("mu2", m.exponents.mu2)?;
            Ok(d)
        })
        .collect()
}

/// `(alpha, f1, f2, re_e, im_e)` rows; NaN at poles.
#[pyfunction]
fn eigen_dump(params: &PyParams, alphas: Vec<f64>) -> Vec<(f64, f64, f64, f64, f64)> {
    dump(&params.0, &alphas)
        .into_iter()
        .map(|s| (s.alpha, s.f1, s.f2, s.re_e, s.im_e))
        .collect()
}

#[pyfunction]
#[pyo3(signature = (params, modes = DEFAULT_MODES, initial = None))]
fn solve_spectral(
    py: Python<'_>,
    params: &PyParams,
    modes: usize,
    initial: Option<&Bound<'_, PyAny>>,
) -> PyResult<PySpectral> {
    let ic = self::initial(initial)?;
    let p = params.0;
    py.detach(|| spectral(&p, &ic, modes))
        .map(PySpectral)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (params, n_z = 400, horizon = 2.0, lambda_ = None, n_t = None, probes = Vec::new(), record_every = 1, initial = None))]
#[allow(clippy::too_many_arguments)]
fn run_fdm(
    py: Python<'_>,
    params: &PyParams,
    n_z: usize,
    horizon: f64,
    lambda_: Option<f64>,
    n_t: Option<usize>,
    probes: Vec<f64>,
    record_every: usize,
    initial: Option<&Bound<'_, PyAny>>,
) -> PyResult<PyTimeSeries> {
    let ic = self::initial(initial)?;
    let p = params.0;
    let grid = match n_t {
        Some(n_t) => Grid::new(n_z, n_t, horizon),
        None => Grid::with_lambda(
            n_z,
            lambda_.unwrap_or_else(|| default_lambda(p.relaxation_time)),
            horizon,
        ),
    }
    .map_err(err)?;
    let config = FdmConfig::new(grid)
        .probes(&probes)
        .record_every(record_every);
    py.detach(|| fdm(&p, &ic, &config))
        .map(PyTimeSeries)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (params, n_z = 200, horizon = 2.0, ratio = PARABOLIC_RATIO, probes = Vec::new(), record_every = 1, initial = None, closure = "nonlocal"))]
#[allow(clippy::too_many_arguments)]
fn run_parabolic(
    py: Python<'_>,
    params: &PyParams,
    n_z: usize,
    horizon: f64,
    ratio: f64,
    probes: Vec<f64>,
    record_every: usize,
    initial: Option<&Bound<'_, PyAny>>,
    closure: &str,
) -> PyResult<PyTimeSeries> {
    let ic = self::initial(initial)?;
    let p = params.0;
    let closure = match closure {
        "nonlocal" => SurfaceClosure::Nonlocal,
        "local" => SurfaceClosure::Local,
        other => return Err(PyValueError::new_err(format!("unknown closure `{other}`"))),
    };
    let config = ParabolicConfig::with_ratio(n_z, ratio, horizon)
        .map_err(err)?
        .probes(&probes)
        .record_every(record_every)
        .closure(closure);
    py.detach(|| parabolic(&p, &ic, &config))
        .map(PyTimeSeries)
        .map_err(err)
}

/// Compares two series on `tgrid`; with `params`, deviations are also
/// reported relative to `σ_eq`.
#[pyfunction]
#[pyo3(signature = (a, b, tgrid, params = None))]
fn compare(
    a: &PyTimeSeries,
    b: &PyTimeSeries,
    tgrid: Vec<f64>,
    params: Option<&PyParams>,
) -> PyResult<PyReport> {
    let report = compare_engines(&a.0, &b.0, &tgrid).map_err(err)?;
    Ok(PyReport(match params {
        Some(p) => report.with_params(p.0),
        None => report,
    }))
}

/// Backward-difference residual of the surface kinetics at each sample.
#[pyfunction]
fn audit_kinetics(series: &PyTimeSeries, params: &PyParams) -> Vec<f64> {
    kinetics(&series.0, &params.0)
}

/// Particle-balance residual at each stored profile.
#[pyfunction]
fn audit_conservation(series: &PyTimeSeries) -> PyResult<Vec<f64>> {
    conservation(&series.0).map_err(err)
}

#[pymodule]
#[pyo3(name = "hypsorb")]
fn hypsorb_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyTimeSeries>()?;
    m.add_class::<PySpectral>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(find_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(eigen_dump, m)?)?;
    m.add_function(wrap_pyfunction!(solve_spectral, m)?)?;
    m.add_function(wrap_pyfunction!(run_fdm, m)?)?;
    m.add_function(wrap_pyfunction!(run_parabolic, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(audit_kinetics, m)?)?;
    m.add_function(wrap_pyfunction!(audit_conservation, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
