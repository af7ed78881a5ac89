//! Dimensionless parameter set and optical geometry.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Refractive index of water used when none is given.
pub const DEFAULT_REFRACTIVE_INDEX: f64 = 1.333;

/// Smallest admissible mesh.
pub const MIN_MESH_POINTS: usize = 51;

/// Largest admissible angle of incidence in degrees.
pub const MAX_INCIDENCE_DEG: f64 = 80.0;

/// Velocity boundary condition at a horizontal wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// `W = D²W = 0`.
    StressFree,
    /// `W = DW = 0`.
    Rigid,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::StressFree => "free",
            Boundary::Rigid => "rigid",
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Boundary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "free" | "stress-free" | "stressfree" | "stress_free" => Ok(Boundary::StressFree),
            "rigid" => Ok(Boundary::Rigid),
            other => Err(format!("unknown boundary kind `{other}` (expected free or rigid)")),
        }
    }
}

/// Functional form of the phototaxis response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaxisForm {
    /// `A sin(π G / G_c)`.
    Sine,
    /// `M ≡ A`, independent of the light (validation hook).
    Constant,
}

impl FromStr for TaxisForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sine" => Ok(TaxisForm::Sine),
            "constant" => Ok(TaxisForm::Constant),
            other => Err(format!("unknown taxis form `{other}` (expected sine or constant)")),
        }
    }
}

impl fmt::Display for TaxisForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaxisForm::Sine => "sine",
            TaxisForm::Constant => "constant",
        })
    }
}

/// All dimensionless groups, geometry, illumination and discretization
/// choices for one problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspensionParams {
    pub prandtl: f64,
    pub lewis: f64,
    pub swim_speed: f64,
    pub optical_depth: f64,
    pub irradiation_magnitude: f64,
    pub critical_intensity: f64,
    pub incidence_angle_deg: f64,
    pub refractive_index: f64,
    pub rayleigh_bio: f64,
    pub rayleigh_thermal: f64,
    pub top_boundary: Boundary,
    /// Always rigid for the physical problem; stress-free is only used to
    /// check the solver against the free–free convection limit.
    pub bottom_boundary: Boundary,
    pub mesh_points: usize,
    pub taxis_form: TaxisForm,
    pub taxis_amplitude: f64,
}

impl Default for SuspensionParams {
    /// The stress-free-top parameter set at normal incidence.
    fn default() -> Self {
        SuspensionParams {
            prandtl: 5.0,
            lewis: 4.0,
            swim_speed: 10.0,
            optical_depth: 0.5,
            irradiation_magnitude: 0.8,
            critical_intensity: 0.63,
            incidence_angle_deg: 0.0,
            refractive_index: DEFAULT_REFRACTIVE_INDEX,
            rayleigh_bio: 0.0,
            rayleigh_thermal: 50.0,
            top_boundary: Boundary::StressFree,
            bottom_boundary: Boundary::Rigid,
            mesh_points: 101,
            taxis_form: TaxisForm::Sine,
            taxis_amplitude: 0.8,
        }
    }
}

/// A violated parameter invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{field} must be positive (got {value})")]
    NotPositive { field: &'static str, value: f64 },
    #[error("{field} must be finite (got {value})")]
    NotFinite { field: &'static str, value: f64 },
    #[error("swim_speed must be >= 0 (got {0})")]
    NegativeSwimSpeed(f64),
    #[error("incidence angle out of range: incidence_angle_deg must lie in [0, {MAX_INCIDENCE_DEG}] (got {0})")]
    IncidenceOutOfRange(f64),
    #[error("refractive_index must be >= 1 (got {0})")]
    RefractiveIndexBelowOne(f64),
    #[error("mesh below {MIN_MESH_POINTS}: mesh_points = {0}")]
    MeshTooSmall(usize),
    #[error("taxis_amplitude must lie in [0, 1] (got {0})")]
    AmplitudeOutOfRange(f64),
    #[error(
        "sine taxis requires irradiation_magnitude <= 2 * critical_intensity \
         (got I_t = {irradiation}, G_c = {critical})"
    )]
    TaxisRangeExceeded { irradiation: f64, critical: f64 },
}

impl SuspensionParams {
    /// Returns the parameters unchanged when every invariant holds,
    /// otherwise the first violation found.
    pub fn validate(self) -> Result<Self, ParamError> {
        match self.violations().into_iter().next() {
            Some(err) => Err(err),
            None => Ok(self),
        }
    }

    /// Every violated invariant, in field order.
    pub fn violations(&self) -> Vec<ParamError> {
        let mut errs = Vec::new();
        let finite = [
            ("prandtl", self.prandtl),
            ("lewis", self.lewis),
            ("swim_speed", self.swim_speed),
            ("optical_depth", self.optical_depth),
            ("irradiation_magnitude", self.irradiation_magnitude),
            ("critical_intensity", self.critical_intensity),
            ("incidence_angle_deg", self.incidence_angle_deg),
            ("refractive_index", self.refractive_index),
            ("rayleigh_bio", self.rayleigh_bio),
            ("rayleigh_thermal", self.rayleigh_thermal),
            ("taxis_amplitude", self.taxis_amplitude),
        ];
        for (field, value) in finite {
            if !value.is_finite() {
                errs.push(ParamError::NotFinite { field, value });
            }
        }
        if !errs.is_empty() {
            return errs;
        }
        let positive = [
            ("prandtl", self.prandtl),
            ("lewis", self.lewis),
            ("optical_depth", self.optical_depth),
            ("irradiation_magnitude", self.irradiation_magnitude),
            ("critical_intensity", self.critical_intensity),
        ];
        for (field, value) in positive {
            if value <= 0.0 {
                errs.push(ParamError::NotPositive { field, value });
            }
        }
        if self.swim_speed < 0.0 {
            errs.push(ParamError::NegativeSwimSpeed(self.swim_speed));
        }
        if !(0.0..=MAX_INCIDENCE_DEG).contains(&self.incidence_angle_deg) {
            errs.push(ParamError::IncidenceOutOfRange(self.incidence_angle_deg));
        }
        if self.refractive_index < 1.0 {
            errs.push(ParamError::RefractiveIndexBelowOne(self.refractive_index));
        }
        if self.mesh_points < MIN_MESH_POINTS {
            errs.push(ParamError::MeshTooSmall(self.mesh_points));
        }
        if !(0.0..=1.0).contains(&self.taxis_amplitude) {
            errs.push(ParamError::AmplitudeOutOfRange(self.taxis_amplitude));
        }
        if self.taxis_form == TaxisForm::Sine
            && self.critical_intensity > 0.0
            && self.irradiation_magnitude > 2.0 * self.critical_intensity
        {
            errs.push(ParamError::TaxisRangeExceeded {
                irradiation: self.irradiation_magnitude,
                critical: self.critical_intensity,
            });
        }
        errs
    }

    pub fn geometry(&self) -> OpticalGeometry {
        refract(self.incidence_angle_deg, self.refractive_index).with_optical_depth(self.optical_depth)
    }

    /// Uniform mesh on `[0, 1]` with `mesh_points` nodes.
    pub fn mesh(&self) -> Vec<f64> {
        uniform_mesh(self.mesh_points)
    }
}

pub fn uniform_mesh(points: usize) -> Vec<f64> {
    assert!(points >= 2, "a mesh needs at least two points");
    let last = (points - 1) as f64;
    (0..points).map(|i| i as f64 / last).collect()
}

/// Direction of the refracted collimated beam inside the suspension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalGeometry {
    pub incidence_angle_rad: f64,
    pub refraction_angle_rad: f64,
    pub cos_refraction: f64,
    /// `τ_H / cos θ_0`; zero until an optical depth is attached.
    pub slant_factor: f64,
}

impl OpticalGeometry {
    pub fn with_optical_depth(mut self, optical_depth: f64) -> Self {
        self.slant_factor = optical_depth / self.cos_refraction;
        self
    }

    pub fn refraction_angle_deg(&self) -> f64 {
        self.refraction_angle_rad.to_degrees()
    }
}

/// Snell refraction at the air–water interface: `sin θ_i = n_0 sin θ_0`.
///
/// Expects `0 <= theta_i_deg <= 90` and `n_0 >= 1`.
pub fn refract(theta_i_deg: f64, n_0: f64) -> OpticalGeometry {
    debug_assert!((0.0..=90.0).contains(&theta_i_deg) && n_0 >= 1.0);
    let theta_i = theta_i_deg.to_radians();
    let sin_0 = theta_i.sin() / n_0;
    let theta_0 = sin_0.asin();
    OpticalGeometry {
        incidence_angle_rad: theta_i,
        refraction_angle_rad: theta_0,
        // Computed from sin θ_0 so the cosine stays accurate near normal incidence.
        cos_refraction: (1.0 - sin_0 * sin_0).sqrt(),
        slant_factor: 0.0,
    }
}
