//! Linear perturbation problem about the basic state.
//!
//! Disturbances are taken proportional to `exp[σt + i(k_x x + k_y y)]`, so the
//! problem depends on the wavenumber only through `k² = k_x² + k_y²`. The
//! concentration perturbation is carried through `Φ(z) = ∫_z^1 Θ dz'`, which
//! turns the nonlocal intensity perturbation into a local term.

mod nrk;
mod spectrum;
mod system;

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::basic_state::{BasicState, BasicStateError};
use crate::params::Boundary;

pub use nrk::{growth_rate, growth_rate_with, Normalization, NrkOptions, Seed};
pub use spectrum::{rightmost, rightmost_refined, spectrum_oracle, spectrum_oracle_with, spectrum_on};

/// Default tolerance on `|Im σ|` for telling the branches apart.
pub const CLASSIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Error)]
pub enum StabilityError {
    #[error("wavenumber must be positive, got {0}")]
    BadWavenumber(f64),
    #[error("non-finite {name} coefficient at z = {z}")]
    NonFiniteCoefficient { name: &'static str, z: f64 },
    #[error(transparent)]
    Basic(#[from] BasicStateError),
    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64, history: Vec<f64> },
    #[error("singular Jacobian at pivot {pivot}; try a different seed or wavenumber")]
    SingularJacobian { pivot: usize },
    #[error("growth rate is not converged")]
    Unconverged,
}

impl StabilityError {
    /// Residual history when the error came out of the Newton loop.
    pub fn residual_history(&self) -> Option<&[f64]> {
        match self {
            StabilityError::NotConverged { history, .. } => Some(history),
            _ => None,
        }
    }
}

/// Coefficient profiles of the perturbation equations.
///
/// Sampled on the basic-state nodes and the midpoints between them
/// (`2N - 1` points). `stages` holds the three Gauss points of every
/// interval for the collocation scheme and is empty for profiles built with
/// [`Coefficients::on_state`].
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub z: Vec<f64>,
    /// `dn_s/dz`.
    pub dn: Vec<f64>,
    /// `-(τ_H/cos θ_0) V_c d(n_s G_s dM/dG)/dz`.
    pub aleph0: Vec<f64>,
    /// `2 (τ_H/cos θ_0) V_c n_s G_s dM/dG`.
    pub aleph1: Vec<f64>,
    /// `V_c M_s`.
    pub aleph2: Vec<f64>,
    pub(crate) stages: Vec<system::Local>,
}

impl Coefficients {
    /// Builds the profiles on the nodes of `basic`, the midpoints and the
    /// Gauss points.
    pub fn from_basic(basic: &BasicState) -> Result<Self, StabilityError> {
        let mut z = Vec::with_capacity(4 * basic.len() - 3);
        for w in basic.z.windows(2) {
            let h = w[1] - w[0];
            z.extend([w[0], w[0] + nrk::GAUSS_C[0] * h, w[0] + 0.5 * h, w[0] + nrk::GAUSS_C[2] * h]);
        }
        z.push(*basic.z.last().unwrap());
        let all = Self::on_state(&basic.resample_at(&z)?)?;
        let last = z.len() - 1;
        let keep: Vec<usize> = (0..last).filter(|i| i % 2 == 0).chain([last]).collect();
        let pick = |p: &[f64]| keep.iter().map(|&i| p[i]).collect::<Vec<_>>();
        Ok(Coefficients {
            z: pick(&all.z),
            dn: pick(&all.dn),
            aleph0: pick(&all.aleph0),
            aleph1: pick(&all.aleph1),
            aleph2: pick(&all.aleph2),
            stages: (0..last).filter(|i| i % 4 != 0).map(|i| all.local(i)).collect(),
        })
    }

    /// Profiles on the mesh of `state` itself.
    pub fn on_state(state: &BasicState) -> Result<Self, StabilityError> {
        let v = state.params.swim_speed;
        let a = state.geometry.slant_factor;
        let len = state.len();
        let mut c = Coefficients {
            z: state.z.clone(),
            dn: vec![0.0; len],
            aleph0: vec![0.0; len],
            aleph1: vec![0.0; len],
            aleph2: vec![0.0; len],
            stages: Vec::new(),
        };
        for i in 0..len {
            let (n, g, m, mg, mgg) = (state.n_s[i], state.g_s[i], state.m_s[i], state.dmdg[i], state.d2mdg2[i]);
            let ngm = n * g * mg;
            let d_ngm = v * m * ngm + a * n * n * g * mg + a * n * n * g * g * mgg;
            c.dn[i] = v * m * n;
            c.aleph0[i] = -a * v * d_ngm;
            c.aleph1[i] = 2.0 * a * v * ngm;
            c.aleph2[i] = v * m;
        }
        for (name, profile) in [("dn", &c.dn), ("aleph0", &c.aleph0), ("aleph1", &c.aleph1), ("aleph2", &c.aleph2)] {
            if let Some(i) = profile.iter().position(|x| !x.is_finite()) {
                return Err(StabilityError::NonFiniteCoefficient { name, z: c.z[i] });
            }
        }
        Ok(c)
    }

    pub(crate) fn local(&self, i: usize) -> system::Local {
        system::Local { dn: self.dn[i], aleph0: self.aleph0[i], aleph1: self.aleph1[i], aleph2: self.aleph2[i] }
    }

    /// Every other sample, i.e. the values on the basic-state nodes.
    fn nodes(profile: &[f64]) -> Vec<f64> {
        profile.iter().step_by(2).copied().collect()
    }
}

/// One eigenproblem: basic state, wavenumber and Rayleigh numbers.
#[derive(Debug, Clone)]
pub struct StabilityProblem {
    pub basic: Arc<BasicState>,
    pub coefficients: Arc<Coefficients>,
    pub wavenumber: f64,
    pub rayleigh_bio: f64,
    pub rayleigh_thermal: f64,
    pub top: Boundary,
    pub bottom: Boundary,
}

/// Builds the eigenproblem for `(k, R_b, R_T)` about `basic`.
///
/// The bottom wall kind comes from the basic-state parameters.
pub fn assemble(
    basic: &BasicState,
    wavenumber: f64,
    rayleigh_bio: f64,
    rayleigh_thermal: f64,
    top: Boundary,
) -> Result<StabilityProblem, StabilityError> {
    let coefficients = Arc::new(Coefficients::from_basic(basic)?);
    StabilityProblem::new(Arc::new(basic.clone()), coefficients, wavenumber, rayleigh_bio, rayleigh_thermal, top)
}

impl StabilityProblem {
    pub fn new(
        basic: Arc<BasicState>,
        coefficients: Arc<Coefficients>,
        wavenumber: f64,
        rayleigh_bio: f64,
        rayleigh_thermal: f64,
        top: Boundary,
    ) -> Result<Self, StabilityError> {
        if !(wavenumber > 0.0 && wavenumber.is_finite()) {
            return Err(StabilityError::BadWavenumber(wavenumber));
        }
        let bottom = basic.params.bottom_boundary;
        Ok(StabilityProblem { basic, coefficients, wavenumber, rayleigh_bio, rayleigh_thermal, top, bottom })
    }

    /// Same basic state and walls at a different `(k, R_b, R_T)`; the
    /// coefficient profiles are shared.
    pub fn with(&self, wavenumber: f64, rayleigh_bio: f64, rayleigh_thermal: f64) -> Result<Self, StabilityError> {
        let mut p = Self::new(
            self.basic.clone(),
            self.coefficients.clone(),
            wavenumber,
            rayleigh_bio,
            rayleigh_thermal,
            self.top,
        )?;
        p.bottom = self.bottom;
        Ok(p)
    }

    pub fn z(&self) -> &[f64] {
        &self.basic.z
    }

    pub fn aleph0(&self) -> Vec<f64> {
        Coefficients::nodes(&self.coefficients.aleph0)
    }

    pub fn aleph1(&self) -> Vec<f64> {
        Coefficients::nodes(&self.coefficients.aleph1)
    }

    pub fn aleph2(&self) -> Vec<f64> {
        Coefficients::nodes(&self.coefficients.aleph2)
    }

    pub(crate) fn groups(&self) -> system::Groups {
        let p = &self.basic.params;
        system::Groups {
            k2: self.wavenumber * self.wavenumber,
            rayleigh_bio: self.rayleigh_bio,
            rayleigh_thermal: self.rayleigh_thermal,
            inv_prandtl: 1.0 / p.prandtl,
            lewis: p.lewis,
        }
    }
}

/// Converged (or last) Newton iterate.
#[derive(Debug, Clone)]
pub struct GrowthResult {
    pub sigma: Complex64,
    pub z: Vec<f64>,
    pub w: Vec<Complex64>,
    pub phi: Vec<Complex64>,
    /// `Θ = -DΦ`.
    pub theta: Vec<Complex64>,
    pub t: Vec<Complex64>,
    pub converged: bool,
    pub iterations: usize,
    /// Max-norm of the discrete residual at the returned iterate.
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub normalization: Normalization,
    pub(crate) state: Vec<system::Vec9>,
}

impl GrowthResult {
    /// `DW` on the mesh.
    pub fn dw(&self) -> Vec<Complex64> {
        self.state.iter().map(|y| y[system::DW]).collect()
    }

    /// `D²W` on the mesh.
    pub fn d2w(&self) -> Vec<Complex64> {
        self.state.iter().map(|y| y[system::D2W]).collect()
    }

    /// `DT` on the mesh.
    pub fn dt(&self) -> Vec<Complex64> {
        self.state.iter().map(|y| y[system::DT]).collect()
    }

    /// Largest violation of the wall conditions of `problem`.
    pub fn boundary_residual(&self, problem: &StabilityProblem) -> f64 {
        nrk::boundary_rows(problem, self.normalization, &self.state)
            .iter()
            .map(|r| r.norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Branch {
    Stationary,
    Oscillatory,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Stationary => "stationary",
            Branch::Oscillatory => "oscillatory",
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stationary when `|Im σ| ≤ tol`.
pub fn classify(result: &GrowthResult, tol: f64) -> Result<Branch, StabilityError> {
    if !result.converged {
        return Err(StabilityError::Unconverged);
    }
    Ok(classify_sigma(result.sigma, tol))
}

pub fn classify_sigma(sigma: Complex64, tol: f64) -> Branch {
    if sigma.im.abs() <= tol {
        Branch::Stationary
    } else {
        Branch::Oscillatory
    }
}
