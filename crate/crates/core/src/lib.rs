//! Linear stability of thermal phototactic bioconvection in a purely
//! absorbing algal suspension lit by oblique collimated irradiation.

pub mod basic_state;
pub mod config;
pub mod numerics;
pub mod optics;
pub mod oracle;
pub mod neutral;
pub mod params;
pub mod phototaxis;
pub mod selftest;
pub mod stability;

pub use basic_state::{solve_basic_state, BasicState, BasicStateError, Sublayer};
pub use params::{refract, Boundary, OpticalGeometry, ParamError, SuspensionParams, TaxisForm};
pub use phototaxis::{Phototaxis, TaxisFunction};
pub use config::{load_config, parse_config, ConfigError};
pub use neutral::{critical_point, mode_number, oscillatory_bifurcation, CriticalPoint, NeutralCurve, NeutralError, NeutralOptions, NeutralPoint, NeutralSolver, SweptParameter};
pub use stability::{assemble, classify, growth_rate, Branch, GrowthResult, StabilityError, StabilityProblem};
