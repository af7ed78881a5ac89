//! Phototaxis response `M(G)`: the vertical component of the mean swimming
//! direction as a function of the local total intensity.
//!
//! Cells swim up (`M > 0`) in dim light below the critical intensity `G_c`
//! and down (`M < 0`) in bright light above it.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::params::{SuspensionParams, TaxisForm};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("phototaxis evaluated at negative intensity G = {0}")]
pub struct NegativeIntensity(pub f64);

/// A smooth phototaxis response and its first two derivatives.
pub trait Phototaxis: Send + Sync + fmt::Debug {
    fn value(&self, g: f64) -> f64;
    fn derivative(&self, g: f64) -> f64;
    fn second_derivative(&self, g: f64) -> f64;
}

/// Phototaxis response selected by configuration, or a user-supplied one.
#[derive(Debug, Clone)]
pub enum TaxisFunction {
    /// `amplitude * sin(π G / critical_intensity)`, valid for `G <= 2 G_c`.
    Sine { amplitude: f64, critical_intensity: f64 },
    /// Light-independent swimming, `M ≡ value`.
    Constant { value: f64 },
    Custom(Arc<dyn Phototaxis>),
}

impl TaxisFunction {
    pub fn sine(amplitude: f64, critical_intensity: f64) -> Self {
        TaxisFunction::Sine { amplitude, critical_intensity }
    }

    pub fn from_params(params: &SuspensionParams) -> Self {
        match params.taxis_form {
            TaxisForm::Sine => TaxisFunction::sine(params.taxis_amplitude, params.critical_intensity),
            TaxisForm::Constant => TaxisFunction::Constant { value: params.taxis_amplitude },
        }
    }

    /// `M(G)`; errors on negative intensity.
    pub fn taxis_value(&self, g: f64) -> Result<f64, NegativeIntensity> {
        if g < 0.0 {
            return Err(NegativeIntensity(g));
        }
        Ok(self.value(g))
    }

    /// `dM/dG`; errors on negative intensity.
    pub fn taxis_derivative(&self, g: f64) -> Result<f64, NegativeIntensity> {
        if g < 0.0 {
            return Err(NegativeIntensity(g));
        }
        Ok(self.derivative(g))
    }
}

impl Phototaxis for TaxisFunction {
    fn value(&self, g: f64) -> f64 {
        match self {
            TaxisFunction::Sine { amplitude, critical_intensity } => {
                amplitude * (PI * g / critical_intensity).sin()
            }
            TaxisFunction::Constant { value } => *value,
            TaxisFunction::Custom(f) => f.value(g),
        }
    }

    fn derivative(&self, g: f64) -> f64 {
        match self {
            TaxisFunction::Sine { amplitude, critical_intensity } => {
                let w = PI / critical_intensity;
                amplitude * w * (w * g).cos()
            }
            TaxisFunction::Constant { .. } => 0.0,
            TaxisFunction::Custom(f) => f.derivative(g),
        }
    }

    fn second_derivative(&self, g: f64) -> f64 {
        match self {
            TaxisFunction::Sine { amplitude, critical_intensity } => {
                let w = PI / critical_intensity;
                -amplitude * w * w * (w * g).sin()
            }
            TaxisFunction::Constant { .. } => 0.0,
            TaxisFunction::Custom(f) => f.second_derivative(g),
        }
    }
}
