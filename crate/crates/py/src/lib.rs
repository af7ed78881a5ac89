//! Python bindings for the stability solver.

use biostab_core::config::{parse_config, to_config_string};
use biostab_core::neutral::{self, NeutralOptions, NeutralSolver, SweptParameter};
use biostab_core::oracle::{benard_neutral as benard, BenardSetup, BoundaryPair};
use biostab_core::stability::{classify, CLASSIFY_TOL};
use biostab_core::{solve_basic_state, Boundary, SuspensionParams, TaxisForm, TaxisFunction};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Dimensionless parameter set. Keyword arguments override the defaults.
#[pyclass(name = "SuspensionParams", from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: SuspensionParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, pyo3::types::PyDict>>) -> PyResult<Self> {
        let mut text = String::new();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                text.push_str(&format!("{} = {}\n", k.extract::<String>()?, v.str()?.to_str()?));
            }
        }
        let inner = biostab_core::config::parse_unvalidated(&text).map_err(value_err)?;
        Ok(PyParams { inner })
    }

    /// Parses `key = value` text and validates it.
    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        Ok(PyParams { inner: parse_config(text).map_err(value_err)? })
    }

    fn to_config(&self) -> String {
        to_config_string(&self.inner)
    }

    /// Raises `ValueError` naming the first violated invariant.
    fn validate(&self) -> PyResult<()> {
        self.inner.clone().validate().map(|_| ()).map_err(value_err)
    }

    /// `(refraction angle in degrees, cos of it, slant factor)`.
    fn geometry(&self) -> (f64, f64, f64) {
        let g = self.inner.geometry();
        (g.refraction_angle_rad.to_degrees(), g.cos_refraction, g.slant_factor)
    }

    #[getter]
    fn incidence_angle_deg(&self) -> f64 {
        self.inner.incidence_angle_deg
    }

    #[setter]
    fn set_incidence_angle_deg(&mut self, v: f64) {
        self.inner.incidence_angle_deg = v;
    }

    #[getter]
    fn rayleigh_bio(&self) -> f64 {
        self.inner.rayleigh_bio
    }

    #[setter]
    fn set_rayleigh_bio(&mut self, v: f64) {
        self.inner.rayleigh_bio = v;
    }

    #[getter]
    fn rayleigh_thermal(&self) -> f64 {
        self.inner.rayleigh_thermal
    }

    #[setter]
    fn set_rayleigh_thermal(&mut self, v: f64) {
        self.inner.rayleigh_thermal = v;
    }

    #[getter]
    fn top_boundary(&self) -> &'static str {
        self.inner.top_boundary.as_str()
    }

    #[setter]
    fn set_top_boundary(&mut self, v: &str) -> PyResult<()> {
        self.inner.top_boundary = v.parse::<Boundary>().map_err(value_err)?;
        Ok(())
    }

    #[getter]
    fn mesh_points(&self) -> usize {
        self.inner.mesh_points
    }

    #[setter]
    fn set_mesh_points(&mut self, v: usize) {
        self.inner.mesh_points = v;
    }

    #[getter]
    fn taxis_form(&self) -> String {
        self.inner.taxis_form.to_string()
    }

    #[setter]
    fn set_taxis_form(&mut self, v: &str) -> PyResult<()> {
        self.inner.taxis_form = v.parse::<TaxisForm>().map_err(value_err)?;
        Ok(())
    }

    fn __repr__(&self) -> String {
        let body: Vec<String> = to_config_string(&self.inner).lines().map(str::to_string).collect();
        format!("SuspensionParams({})", body.join(", "))
    }
}

/// Equilibrium profiles on the mesh.
#[pyclass(name = "BasicState", frozen)]
struct PyBasicState {
    #[pyo3(get)]
    z: Vec<f64>,
    #[pyo3(get)]
    varpi: Vec<f64>,
    #[pyo3(get)]
    n_s: Vec<f64>,
    #[pyo3(get)]
    t_s: Vec<f64>,
    #[pyo3(get)]
    g_s: Vec<f64>,
    #[pyo3(get)]
    m_s: Vec<f64>,
    #[pyo3(get)]
    dmdg: Vec<f64>,
    #[pyo3(get)]
    mass: f64,
    #[pyo3(get)]
    ode_residual: f64,
    #[pyo3(get)]
    sublayer: f64,
}

#[pyfunction]
fn basic_state(params: &PyParams) -> PyResult<PyBasicState> {
    let p = params.inner.clone().validate().map_err(value_err)?;
    let b = solve_basic_state(&p, &TaxisFunction::from_params(&p)).map_err(runtime_err)?;
    Ok(PyBasicState {
        mass: b.mass(),
        ode_residual: b.ode_residual(),
        sublayer: b.sublayer_position().z,
        z: b.z,
        varpi: b.varpi,
        n_s: b.n_s,
        t_s: b.t_s,
        g_s: b.g_s,
        m_s: b.m_s,
        dmdg: b.dmdg,
    })
}

/// Converged growth rate with its eigenfunctions.
#[pyclass(name = "GrowthResult", frozen)]
struct PyGrowth {
    #[pyo3(get)]
    sigma: Complex64,
    #[pyo3(get)]
    z: Vec<f64>,
    #[pyo3(get)]
    w: Vec<Complex64>,
    #[pyo3(get)]
    phi: Vec<Complex64>,
    #[pyo3(get)]
    theta: Vec<Complex64>,
    #[pyo3(get)]
    t: Vec<Complex64>,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    branch: String,
    #[pyo3(get)]
    mode: Option<usize>,
}

/// Leading growth rate at `(k, R_b, R_T)`; the Rayleigh numbers default to
/// the ones in `params`.
#[pyfunction]
#[pyo3(signature = (params, k, rb=None, rt=None, mode=1))]
fn growth_rate(params: &PyParams, k: f64, rb: Option<f64>, rt: Option<f64>, mode: usize) -> PyResult<PyGrowth> {
    let mut p = params.inner.clone();
    if let Some(rt) = rt {
        p.rayleigh_thermal = rt;
    }
    let rb = rb.unwrap_or(p.rayleigh_bio);
    let options = NeutralOptions { mode, ..NeutralOptions::default() };
    let solver = NeutralSolver::new(&p, SweptParameter::RayleighBio, options).map_err(value_err)?;
    let r = solver.leading(k, rb, None).map_err(runtime_err)?;
    Ok(PyGrowth {
        sigma: r.sigma,
        branch: classify(&r, CLASSIFY_TOL).map_err(runtime_err)?.as_str().to_string(),
        mode: neutral::mode_number(&r.w).ok(),
        iterations: r.iterations,
        residual: r.residual,
        z: r.z,
        w: r.w,
        phi: r.phi,
        theta: r.theta,
        t: r.t,
    })
}

/// Traced neutral curve.
#[pyclass(name = "NeutralCurve", frozen)]
struct PyCurve {
    inner: neutral::NeutralCurve,
}

#[pymethods]
impl PyCurve {
    /// `(k, R, Im σ, branch, mode)` per point, sorted by `k`.
    #[getter]
    fn points(&self) -> Vec<(f64, f64, f64, &'static str, usize)> {
        self.inner.points.iter().map(|p| (p.k, p.r, p.im_sigma, p.branch.as_str(), p.mode)).collect()
    }

    /// `(k, reason)` for every wavenumber without a neutral point.
    #[getter]
    fn gaps(&self) -> Vec<(f64, String)> {
        self.inner.gaps.iter().map(|g| (g.k, g.reason.clone())).collect()
    }

    /// `(k_c, R_c, lambda_c, branch, mode)`.
    fn critical_point(&self) -> PyResult<(f64, f64, f64, &'static str, usize)> {
        let c = neutral::critical_point(&self.inner).map_err(runtime_err)?;
        Ok((c.k_c, c.r_c, c.lambda_c, c.branch.as_str(), c.mode))
    }

    /// Smallest `k` where the curve turns from oscillatory to stationary.
    fn oscillatory_bifurcation(&self) -> Option<f64> {
        neutral::oscillatory_bifurcation(&self.inner).map(|b| b.k_b)
    }

    fn __len__(&self) -> usize {
        self.inner.points.len()
    }
}

/// Neutral curve over `[k_min, k_max]`; `sweep` is "rb" or "rt".
#[pyfunction]
#[pyo3(signature = (params, k_min=0.5, k_max=10.0, k_step=0.1, sweep="rb", mode=1))]
fn neutral_curve(
    py: Python<'_>,
    params: &PyParams,
    k_min: f64,
    k_max: f64,
    k_step: f64,
    sweep: &str,
    mode: usize,
) -> PyResult<PyCurve> {
    let swept: SweptParameter = sweep.parse().map_err(value_err)?;
    let p = params.inner.clone();
    let options = NeutralOptions { mode, ..NeutralOptions::default() };
    let curve = py
        .detach(|| NeutralSolver::new(&p, swept, options).and_then(|s| s.trace((k_min, k_max), k_step)))
        .map_err(runtime_err)?;
    Ok(PyCurve { inner: curve })
}

/// Cell-free convection threshold; `walls` is "rigid-rigid", "rigid-free"
/// or "free-free".
#[pyfunction]
fn benard_neutral(walls: &str, k: f64) -> PyResult<f64> {
    let walls = match walls {
        "rigid-rigid" => BoundaryPair::RigidRigid,
        "rigid-free" => BoundaryPair::RigidFree,
        "free-free" => BoundaryPair::FreeFree,
        other => return Err(value_err(format!("unknown wall pair `{other}`"))),
    };
    if !(k > 0.0) {
        return Err(value_err("wavenumber must be positive"));
    }
    Ok(benard(BenardSetup { walls, wavenumber: k }))
}

/// `(name, passed, detail)` for every reference check.
#[pyfunction]
fn selftest(py: Python<'_>) -> Vec<(String, bool, String)> {
    py.detach(biostab_core::selftest::selftest).into_iter().map(|c| (c.name.to_string(), c.passed, c.detail)).collect()
}

#[pymodule]
fn biostab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyBasicState>()?;
    m.add_class::<PyGrowth>()?;
    m.add_class::<PyCurve>()?;
    m.add_function(wrap_pyfunction!(basic_state, m)?)?;
    m.add_function(wrap_pyfunction!(growth_rate, m)?)?;
    m.add_function(wrap_pyfunction!(neutral_curve, m)?)?;
    m.add_function(wrap_pyfunction!(benard_neutral, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
