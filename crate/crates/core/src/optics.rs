//! Light field in a purely absorbing suspension.
//!
//! With no scattering the collimated beam decays along its slant path, so the
//! total intensity has the closed form `G_s = I_t exp(τ_H ϖ / cos θ_0)` where
//! `ϖ(z) = -∫_z^1 n_s dz'` is the (non-positive) cumulative concentration.

use thiserror::Error;

use crate::params::OpticalGeometry;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error("mesh has {mesh} points but profile has {profile}")]
    MeshMismatch { mesh: usize, profile: usize },
}

/// Basic-state total intensity sampled on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityProfile {
    pub z: Vec<f64>,
    pub g: Vec<f64>,
}

/// Intensity at a single point from the cumulative concentration there.
#[inline]
pub fn intensity_at(varpi: f64, slant_factor: f64, irradiation: f64) -> f64 {
    irradiation * (slant_factor * varpi).exp()
}

/// `G_s(z_i) = I_t exp(τ_H ϖ(z_i) / cos θ_0)` on the mesh.
pub fn basic_intensity(
    z: &[f64],
    varpi: &[f64],
    geom: &OpticalGeometry,
    tau_h: f64,
    irradiation: f64,
) -> Result<IntensityProfile, OpticsError> {
    if z.len() != varpi.len() {
        return Err(OpticsError::MeshMismatch { mesh: z.len(), profile: varpi.len() });
    }
    let slant = tau_h / geom.cos_refraction;
    Ok(IntensityProfile {
        z: z.to_vec(),
        g: varpi.iter().map(|&w| intensity_at(w, slant, irradiation)).collect(),
    })
}

/// Multiplier `c(z) = (τ_H / cos θ_0) G_s(z)` such that the intensity
/// perturbation is `G_1 = -c(z) Φ(z)` with `Φ = ∫_z^1 Θ dz'`.
pub fn perturbed_intensity_coefficient(profile: &IntensityProfile, geom: &OpticalGeometry, tau_h: f64) -> Vec<f64> {
    let slant = tau_h / geom.cos_refraction;
    profile.g.iter().map(|g| slant * g).collect()
}

/// Vertical radiative heat flux `q_s · ẑ = -G_s cos θ_0` (downward).
pub fn vertical_heat_flux(profile: &IntensityProfile, geom: &OpticalGeometry) -> Vec<f64> {
    profile.g.iter().map(|g| -g * geom.cos_refraction).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{refract, uniform_mesh};

    fn uniform_varpi(z: &[f64]) -> Vec<f64> {
        z.iter().map(|z| z - 1.0).collect()
    }

    #[test]
    fn empty_suspension_is_unattenuated() {
        let z = uniform_mesh(11);
        let g = basic_intensity(&z, &vec![0.0; 11], &refract(30.0, 1.333), 0.5, 0.8).unwrap();
        assert!(g.g.iter().all(|&v| v == 0.8));
    }

    #[test]
    fn uniform_normal_incidence() {
        let z = uniform_mesh(51);
        let g = basic_intensity(&z, &uniform_varpi(&z), &refract(0.0, 1.333), 0.5, 0.8).unwrap();
        let expected = 0.8 * (-0.5f64).exp();
        assert!((g.g[0] - expected).abs() < 1e-15);
        assert!((g.g[0] - 0.4852).abs() < 1e-4);
        assert_eq!(g.g[50], 0.8);
    }

    #[test]
    fn uniform_oblique_incidence() {
        let z = uniform_mesh(51);
        let geom = refract(80.0, 1.333);
        let g = basic_intensity(&z, &uniform_varpi(&z), &geom, 0.5, 0.8).unwrap();
        let expected = 0.8 * (-0.5 / geom.cos_refraction).exp();
        assert!((g.g[0] - expected).abs() < 1e-15);
        assert!((g.g[0] - 0.3812).abs() < 1e-3);
    }

    #[test]
    fn mismatched_mesh() {
        let err = basic_intensity(&[0.0, 1.0], &[0.0], &refract(0.0, 1.333), 1.0, 1.0).unwrap_err();
        assert_eq!(err, OpticsError::MeshMismatch { mesh: 2, profile: 1 });
    }

    #[test]
    fn perturbation_coefficient() {
        let z = uniform_mesh(11);
        let geom = refract(0.0, 1.333);
        let flat = basic_intensity(&z, &vec![0.0; 11], &geom, 0.5, 0.8).unwrap();
        let c = perturbed_intensity_coefficient(&flat, &geom, 0.5);
        assert!(c.iter().all(|&v| (v - 0.4).abs() < 1e-15));

        let g = basic_intensity(&z, &uniform_varpi(&z), &geom, 0.5, 0.8).unwrap();
        let c = perturbed_intensity_coefficient(&g, &geom, 0.5);
        assert!((c[0] - 0.2426).abs() < 1e-4);

        let geom = refract(60.0, 1.333);
        let c = perturbed_intensity_coefficient(&g, &geom, 1.0);
        assert!((geom.cos_refraction - 0.7604).abs() < 1e-3);
        for (ci, gi) in c.iter().zip(&g.g) {
            assert!((ci - gi / geom.cos_refraction).abs() < 1e-15);
        }
    }

    #[test]
    fn slant_path_dims_interior() {
        let z = uniform_mesh(21);
        let w = uniform_varpi(&z);
        let mut prev = f64::INFINITY;
        for deg in [0.0, 20.0, 40.0, 60.0, 80.0] {
            let g = basic_intensity(&z, &w, &refract(deg, 1.333), 0.7, 0.8).unwrap();
            assert!(g.g[5] < prev);
            prev = g.g[5];
        }
    }

    #[test]
    fn depends_only_on_scaled_optical_path() {
        let z = uniform_mesh(21);
        let w = uniform_varpi(&z);
        let geom = refract(50.0, 1.333);
        let a = basic_intensity(&z, &w, &geom, 0.6, 0.8).unwrap();
        // Same τ_H / cos θ_0 at normal incidence, different I_t.
        let b = basic_intensity(&z, &w, &refract(0.0, 1.333), 0.6 / geom.cos_refraction, 0.3).unwrap();
        for (ga, gb) in a.g.iter().zip(&b.g) {
            assert!((ga / 0.8 - gb / 0.3).abs() < 1e-14);
        }
    }

    #[test]
    fn heat_flux_points_down() {
        let z = uniform_mesh(5);
        let geom = refract(40.0, 1.333);
        let g = basic_intensity(&z, &uniform_varpi(&z), &geom, 0.5, 0.8).unwrap();
        let q = vertical_heat_flux(&g, &geom);
        assert!((q[4] + 0.8 * geom.cos_refraction).abs() < 1e-15);
        assert!(q.iter().all(|&v| v < 0.0));
    }
}
