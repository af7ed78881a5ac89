//! Flat `key = value` parameter files.
//!
//! One key per line, named after the `SuspensionParams` field it sets.
//! `#` starts a comment, blank lines are ignored and keys not given keep
//! their defaults. Errors carry the 1-based line number.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::params::{ParamError, SuspensionParams};

/// Every recognised key, in the order `to_config_string` writes them.
pub const KEYS: [&str; 15] = [
    "prandtl",
    "lewis",
    "swim_speed",
    "optical_depth",
    "irradiation_magnitude",
    "critical_intensity",
    "incidence_angle_deg",
    "refractive_index",
    "rayleigh_bio",
    "rayleigh_thermal",
    "top_boundary",
    "bottom_boundary",
    "mesh_points",
    "taxis_form",
    "taxis_amplitude",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid parameters: {0}")]
    Invalid(#[from] ParamError),
}

fn syntax(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Syntax { line, message: message.into() }
}

/// Parses `text` on top of the defaults without validating the result.
pub fn parse_unvalidated(text: &str) -> Result<SuspensionParams, ConfigError> {
    let mut p = SuspensionParams::default();
    let mut seen: Vec<(&str, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| syntax(line, format!("expected `key = value`, got `{body}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(syntax(line, format!("missing value for `{key}`")));
        }
        let known = KEYS
            .iter()
            .copied()
            .find(|k| *k == key)
            .ok_or_else(|| syntax(line, format!("unknown key `{key}`")))?;
        if let Some((_, first)) = seen.iter().find(|(k, _)| *k == known) {
            return Err(syntax(line, format!("duplicate key `{key}` (first set on line {first})")));
        }
        seen.push((known, line));
        let num = || -> Result<f64, ConfigError> {
            value.parse::<f64>().map_err(|_| syntax(line, format!("`{key}` expects a number, got `{value}`")))
        };
        match known {
            "prandtl" => p.prandtl = num()?,
            "lewis" => p.lewis = num()?,
            "swim_speed" => p.swim_speed = num()?,
            "optical_depth" => p.optical_depth = num()?,
            "irradiation_magnitude" => p.irradiation_magnitude = num()?,
            "critical_intensity" => p.critical_intensity = num()?,
            "incidence_angle_deg" => p.incidence_angle_deg = num()?,
            "refractive_index" => p.refractive_index = num()?,
            "rayleigh_bio" => p.rayleigh_bio = num()?,
            "rayleigh_thermal" => p.rayleigh_thermal = num()?,
            "taxis_amplitude" => p.taxis_amplitude = num()?,
            "top_boundary" => p.top_boundary = value.parse().map_err(|e: String| syntax(line, e))?,
            "bottom_boundary" => p.bottom_boundary = value.parse().map_err(|e: String| syntax(line, e))?,
            "taxis_form" => p.taxis_form = value.parse().map_err(|e: String| syntax(line, e))?,
            "mesh_points" => {
                p.mesh_points = value
                    .parse()
                    .map_err(|_| syntax(line, format!("`mesh_points` expects a positive integer, got `{value}`")))?
            }
            _ => unreachable!("every key in KEYS is handled"),
        }
    }
    Ok(p)
}

/// Parses and validates.
pub fn parse_config(text: &str) -> Result<SuspensionParams, ConfigError> {
    Ok(parse_unvalidated(text)?.validate()?)
}

/// Reads, parses and validates the file at `path`.
pub fn load_config(path: &Path) -> Result<SuspensionParams, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

/// Writes every key, so that `parse_config(to_config_string(p)) == p`.
pub fn to_config_string(p: &SuspensionParams) -> String {
    let mut s = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    put("prandtl", format!("{:?}", p.prandtl));
    put("lewis", format!("{:?}", p.lewis));
    put("swim_speed", format!("{:?}", p.swim_speed));
    put("optical_depth", format!("{:?}", p.optical_depth));
    put("irradiation_magnitude", format!("{:?}", p.irradiation_magnitude));
    put("critical_intensity", format!("{:?}", p.critical_intensity));
    put("incidence_angle_deg", format!("{:?}", p.incidence_angle_deg));
    put("refractive_index", format!("{:?}", p.refractive_index));
    put("rayleigh_bio", format!("{:?}", p.rayleigh_bio));
    put("rayleigh_thermal", format!("{:?}", p.rayleigh_thermal));
    put("top_boundary", p.top_boundary.to_string());
    put("bottom_boundary", p.bottom_boundary.to_string());
    put("mesh_points", p.mesh_points.to_string());
    put("taxis_form", p.taxis_form.to_string());
    put("taxis_amplitude", format!("{:?}", p.taxis_amplitude));
    s
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::params::{Boundary, TaxisForm};

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), SuspensionParams::default());
        assert_eq!(parse_config("# only a comment\n\n").unwrap(), SuspensionParams::default());
    }

    #[test]
    fn fig3_config() {
        let text = "# rigid top\noptical_depth = 1\ncritical_intensity = 0.495 # shifted\ntop_boundary = rigid\n";
        let p = parse_config(text).unwrap();
        assert_eq!(p.optical_depth, 1.0);
        assert_eq!(p.critical_intensity, 0.495);
        assert_eq!(p.top_boundary, Boundary::Rigid);
        assert_eq!(p.taxis_form, TaxisForm::Sine);
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("prandtl = 5\nfoo = 1\n", 2, "unknown key"),
            ("\n\nlewis 4\n", 3, "expected `key = value`"),
            ("lewis = four", 1, "expects a number"),
            ("lewis = 4\nlewis = 5", 2, "duplicate key"),
            ("top_boundary = sticky", 1, "unknown boundary"),
            ("mesh_points = -3", 1, "positive integer"),
            ("swim_speed =", 1, "missing value"),
        ];
        for (text, line, needle) in cases {
            let err = parse_config(text).unwrap_err();
            let msg = err.to_string();
            assert!(matches!(err, ConfigError::Syntax { line: l, .. } if l == line), "{msg}");
            assert!(msg.contains(needle), "{msg}");
        }
    }

    #[test]
    fn invalid_values_are_rejected() {
        let err = parse_config("mesh_points = 11").unwrap_err();
        assert!(err.to_string().contains("mesh below 51"));
        assert!(parse_unvalidated("mesh_points = 11").is_ok());
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_config(Path::new("/nonexistent/biostab.cfg")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/biostab.cfg"));
    }

    proptest! {
        #[test]
        fn round_trip(
            prandtl in 0.1f64..20.0,
            swim_speed in 0.0f64..20.0,
            theta in 0.0f64..80.0,
            rb in -500.0f64..500.0,
            points in 51usize..301,
            rigid in any::<bool>(),
        ) {
            let p = SuspensionParams {
                prandtl,
                swim_speed,
                incidence_angle_deg: theta,
                rayleigh_bio: rb,
                mesh_points: points,
                top_boundary: if rigid { Boundary::Rigid } else { Boundary::StressFree },
                ..SuspensionParams::default()
            };
            prop_assert_eq!(parse_config(&to_config_string(&p)).unwrap(), p);
        }
    }
}
