//! Equilibrium (no-flow) state of the illuminated suspension.
//!
//! In terms of the cumulative concentration `ϖ(z) = ∫_1^z n_s dz'` the cell
//! balance becomes the two-point problem
//!
//! ```text
//! ϖ'' = V_c M(G_s(ϖ)) ϖ',   ϖ(0) = -1,   ϖ(1) = 0,
//! G_s(ϖ) = I_t exp(τ_H ϖ / cos θ_0),
//! ```
//!
//! which is solved by shooting downward from the top on the unknown slope
//! `s = ϖ'(1) = n_s(1)`.

use thiserror::Error;

use crate::numerics::{DormandPrince, GaussLegendre, OdeError};
use crate::optics::{self, intensity_at};
use crate::params::{uniform_mesh, OpticalGeometry, ParamError, SuspensionParams};
use crate::phototaxis::{Phototaxis, TaxisFunction};

/// Tolerance on the shooting residual `|ϖ(0) + 1|`.
pub const SHOOTING_TOL: f64 = 1e-12;
const MAX_SHOOTING_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BasicStateError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("shooting did not converge after {iterations} iterations (last residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("basic-state integration failed: {0}")]
    Integration(#[from] OdeError),
    #[error("mesh must be increasing from 0 to 1")]
    BadMesh,
}

/// Mesh-sampled equilibrium profiles.
#[derive(Debug, Clone)]
pub struct BasicState {
    pub z: Vec<f64>,
    pub varpi: Vec<f64>,
    pub n_s: Vec<f64>,
    pub t_s: Vec<f64>,
    pub g_s: Vec<f64>,
    pub m_s: Vec<f64>,
    pub dmdg: Vec<f64>,
    pub d2mdg2: Vec<f64>,
    pub params: SuspensionParams,
    pub taxis: TaxisFunction,
    pub geometry: OpticalGeometry,
    /// Converged shooting parameter `n_s(1)`.
    pub top_concentration: f64,
    pub shooting_iterations: usize,
    /// Final `|ϖ(0) + 1|`.
    pub boundary_residual: f64,
}

/// Location and height of the concentration maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sublayer {
    pub z: f64,
    pub n_max: f64,
    /// The profile is flat to round-off; `z` is then 1 by the tie rule.
    pub uniform: bool,
}

/// `T_s(z) = 1 - z`.
pub fn temperature_profile(z: &[f64]) -> Vec<f64> {
    z.iter().map(|z| 1.0 - z).collect()
}

/// Solves the basic state on the uniform mesh of `params.mesh_points` nodes.
pub fn solve_basic_state(params: &SuspensionParams, taxis: &TaxisFunction) -> Result<BasicState, BasicStateError> {
    let params = params.clone().validate()?;
    let z = uniform_mesh(params.mesh_points);
    solve_on_mesh(&params, taxis, &z, None)
}

/// Solves on an arbitrary increasing mesh from 0 to 1, optionally starting
/// the shooting iteration from a known `n_s(1)`.
pub fn solve_on_mesh(
    params: &SuspensionParams,
    taxis: &TaxisFunction,
    z: &[f64],
    guess: Option<f64>,
) -> Result<BasicState, BasicStateError> {
    if z.len() < 2 || z[0] != 0.0 || *z.last().unwrap() != 1.0 || z.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BasicStateError::BadMesh);
    }
    let geometry = params.geometry();
    let swim = params.swim_speed;

    if swim == 0.0 {
        let varpi: Vec<f64> = z.iter().map(|z| z - 1.0).collect();
        let n_s = vec![1.0; z.len()];
        return Ok(fill(params, taxis, geometry, z, varpi, n_s, 1.0, 0, 0.0));
    }

    let slant = geometry.slant_factor;
    let it = params.irradiation_magnitude;
    let rhs = |_: f64, y: &[f64; 4]| {
        let [w, n, dw, dn] = *y;
        let g = intensity_at(w, slant, it);
        let m = taxis.value(g);
        let mg = taxis.derivative(g);
        [n, swim * m * n, dn, swim * (mg * g * slant * dw * n + m * dn)]
    };
    let downward: Vec<f64> = z.iter().rev().copied().collect();
    let integrator = DormandPrince::default();
    let shoot = |s: f64| -> Result<Vec<[f64; 4]>, OdeError> { integrator.integrate(rhs, 1.0, [0.0, s, 0.0, 1.0], &downward) };

    // F(s) = ϖ(0; s) + 1 decreases in s with F(0) = 1.
    let mut lo: f64 = 0.0;
    let mut hi = f64::INFINITY;
    let mut s = guess.filter(|g| *g > 0.0).unwrap_or(1.0);
    let mut residual = f64::INFINITY;
    for iteration in 1..=MAX_SHOOTING_ITERATIONS {
        let traj = shoot(s)?;
        let bottom = traj.last().unwrap();
        residual = bottom[0] + 1.0;
        if residual.abs() <= SHOOTING_TOL {
            let mut varpi: Vec<f64> = traj.iter().rev().map(|y| y[0]).collect();
            let n_s: Vec<f64> = traj.iter().rev().map(|y| y[1]).collect();
            varpi[z.len() - 1] = 0.0;
            return Ok(fill(params, taxis, geometry, z, varpi, n_s, s, iteration, residual.abs()));
        }
        if residual > 0.0 {
            lo = lo.max(s);
        } else {
            hi = hi.min(s);
        }
        let slope = bottom[2];
        let newton = s - residual / slope;
        s = if slope < 0.0 && newton > lo && newton < hi {
            newton
        } else if hi.is_finite() {
            0.5 * (lo + hi)
        } else {
            2.0 * s.max(lo)
        };
    }
    Err(BasicStateError::Convergence { iterations: MAX_SHOOTING_ITERATIONS, residual })
}

#[allow(clippy::too_many_arguments)]
fn fill(
    params: &SuspensionParams,
    taxis: &TaxisFunction,
    geometry: OpticalGeometry,
    z: &[f64],
    varpi: Vec<f64>,
    n_s: Vec<f64>,
    top: f64,
    iterations: usize,
    residual: f64,
) -> BasicState {
    let g_s = optics::basic_intensity(z, &varpi, &geometry, params.optical_depth, params.irradiation_magnitude)
        .expect("mesh and profile built together")
        .g;
    BasicState {
        z: z.to_vec(),
        t_s: temperature_profile(z),
        m_s: g_s.iter().map(|&g| taxis.value(g)).collect(),
        dmdg: g_s.iter().map(|&g| taxis.derivative(g)).collect(),
        d2mdg2: g_s.iter().map(|&g| taxis.second_derivative(g)).collect(),
        varpi,
        n_s,
        g_s,
        params: params.clone(),
        taxis: taxis.clone(),
        geometry,
        top_concentration: top,
        shooting_iterations: iterations,
        boundary_residual: residual,
    }
}

impl BasicState {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Re-solves on a uniform mesh of `points` nodes, warm-started.
    pub fn resample(&self, points: usize) -> Result<BasicState, BasicStateError> {
        solve_on_mesh(&self.params, &self.taxis, &uniform_mesh(points), Some(self.top_concentration))
    }

    /// Re-solves on an arbitrary mesh, warm-started.
    pub fn resample_at(&self, z: &[f64]) -> Result<BasicState, BasicStateError> {
        solve_on_mesh(&self.params, &self.taxis, z, Some(self.top_concentration))
    }

    /// `dn_s/dz = V_c M_s n_s`.
    pub fn dn_dz(&self) -> Vec<f64> {
        let v = self.params.swim_speed;
        self.m_s.iter().zip(&self.n_s).map(|(m, n)| v * m * n).collect()
    }

    /// `d²n_s/dz²` from differentiating the cell balance.
    pub fn d2n_dz2(&self) -> Vec<f64> {
        let v = self.params.swim_speed;
        let a = self.geometry.slant_factor;
        (0..self.len())
            .map(|i| {
                let (n, g, m, mg) = (self.n_s[i], self.g_s[i], self.m_s[i], self.dmdg[i]);
                v * (mg * a * g * n * n + m * v * m * n)
            })
            .collect()
    }

    /// `∫_0^1 n_s dz`, summed over the mesh intervals.
    pub fn mass(&self) -> f64 {
        self.interval_integrals().iter().sum()
    }

    /// `∫ n_s dz` over each mesh interval, with `n_s` between the nodes given
    /// by the governing equation started from the left node's values.
    ///
    /// Mesh-based rules lose accuracy once `V_c M h` is no longer small;
    /// integrating along the equation keeps the measurement independent of
    /// the spacing.
    pub fn interval_integrals(&self) -> Vec<f64> {
        let v = self.params.swim_speed;
        let a = self.geometry.slant_factor;
        let it = self.params.irradiation_magnitude;
        let rhs = |_: f64, y: &[f64; 3]| {
            let m = self.taxis.value(intensity_at(y[0], a, it));
            [y[1], v * m * y[1], y[1]]
        };
        let integrator = DormandPrince::default();
        self.z
            .windows(2)
            .enumerate()
            .map(|(i, w)| match integrator.integrate(rhs, w[0], [self.varpi[i], self.n_s[i], 0.0], &[w[1]]) {
                Ok(y) => y[0][2],
                Err(_) => f64::NAN,
            })
            .collect()
    }

    /// Maximum residual of the boundary-value problem on the mesh.
    ///
    /// Combines the boundary conditions, the first integral
    /// `n_s(z) = n_s(1) + V_c ∫_0^{ϖ(z)} M(G_s(u)) du` of `ϖ'' = V_c M ϖ'`,
    /// and the local balance `ϖ(z_{i+1}) - ϖ(z_i) = ∫ n_s dz` per interval.
    pub fn ode_residual(&self) -> f64 {
        let mut worst = (self.varpi[0] + 1.0).abs().max(self.varpi[self.len() - 1].abs());
        let v = self.params.swim_speed;
        let a = self.geometry.slant_factor;
        let it = self.params.irradiation_magnitude;
        let top = self.n_s[self.len() - 1];
        let gl = GaussLegendre::new(10);
        for (&w, &n) in self.varpi.iter().zip(&self.n_s) {
            let integral = if v == 0.0 || w == 0.0 {
                0.0
            } else {
                -gl.integrate_composite(w, 0.0, 8, |u| self.taxis.value(intensity_at(u, a, it)))
            };
            worst = worst.max((n - top - v * integral).abs());
        }
        for (i, local) in self.interval_integrals().into_iter().enumerate() {
            let gap = (self.varpi[i + 1] - self.varpi[i] - local).abs();
            worst = if gap.is_nan() { f64::INFINITY } else { worst.max(gap) };
        }
        worst
    }

    /// The concentration maximum, refined by a local parabola.
    pub fn sublayer_position(&self) -> Sublayer {
        sublayer_position(self)
    }
}

/// Argmax of `n_s` with quadratic refinement; ties go to the larger `z`.
pub fn sublayer_position(state: &BasicState) -> Sublayer {
    let n = &state.n_s;
    let z = &state.z;
    let (max, min) = n.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(a, b), &v| (a.max(v), b.min(v)));
    if max - min <= 1e-12 * max.abs().max(1.0) {
        return Sublayer { z: 1.0, n_max: max, uniform: true };
    }
    let mut best = 0;
    for (i, &v) in n.iter().enumerate() {
        if v >= n[best] {
            best = i;
        }
    }
    if best == 0 || best == n.len() - 1 {
        return Sublayer { z: z[best], n_max: n[best], uniform: false };
    }
    let (z0, z1, z2) = (z[best - 1], z[best], z[best + 1]);
    let (f0, f1, f2) = (n[best - 1], n[best], n[best + 1]);
    let denom = (z0 - z1) * (z0 - z2) * (z1 - z2);
    let a = (z2 * (f1 - f0) + z1 * (f0 - f2) + z0 * (f2 - f1)) / denom;
    let b = (z2 * z2 * (f0 - f1) + z1 * z1 * (f2 - f0) + z0 * z0 * (f1 - f2)) / denom;
    if a >= 0.0 {
        return Sublayer { z: z1, n_max: f1, uniform: false };
    }
    let zv = (-b / (2.0 * a)).clamp(z0, z2);
    let c = f1 - a * z1 * z1 - b * z1;
    Sublayer { z: zv, n_max: a * zv * zv + b * zv + c, uniform: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{Boundary, TaxisForm};

    fn fig2(theta: f64) -> SuspensionParams {
        SuspensionParams { incidence_angle_deg: theta, ..SuspensionParams::default() }
    }

    fn fig3(theta: f64) -> SuspensionParams {
        SuspensionParams {
            optical_depth: 1.0,
            critical_intensity: 0.495,
            top_boundary: Boundary::Rigid,
            incidence_angle_deg: theta,
            ..SuspensionParams::default()
        }
    }

    fn solve(p: &SuspensionParams) -> BasicState {
        solve_basic_state(p, &TaxisFunction::from_params(p)).unwrap()
    }

    #[test]
    fn temperature_is_linear() {
        let t = temperature_profile(&[0.0, 0.25, 1.0]);
        assert_eq!(t, vec![1.0, 0.75, 0.0]);
    }

    #[test]
    fn no_swimming_gives_uniform_state() {
        let p = SuspensionParams { swim_speed: 0.0, ..fig2(0.0) };
        let s = solve(&p);
        assert!(s.n_s.iter().all(|&n| n == 1.0));
        for (z, w) in s.z.iter().zip(&s.varpi) {
            assert_eq!(*w, z - 1.0);
        }
        let layer = s.sublayer_position();
        assert!(layer.uniform);
        assert_eq!(layer.z, 1.0);
    }

    #[test]
    fn constant_taxis_matches_closed_form() {
        for lambda in [0.5, 1.0, 5.0] {
            let p = SuspensionParams {
                swim_speed: lambda / 0.5,
                taxis_form: TaxisForm::Constant,
                taxis_amplitude: 0.5,
                ..fig2(30.0)
            };
            let s = solve(&p);
            let err = s
                .z
                .iter()
                .zip(&s.n_s)
                .map(|(z, n)| (n - lambda * (lambda * z).exp() / lambda.exp_m1()).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "lambda {lambda}: {err:e}");
        }
    }

    #[test]
    fn boundary_values_and_mass() {
        let s = solve(&fig2(0.0));
        assert!((s.varpi[0] + 1.0).abs() < 1e-10);
        assert_eq!(s.varpi[s.len() - 1], 0.0);
        assert!(s.n_s.iter().all(|&n| n > 0.0));
        assert!((s.mass() - 1.0).abs() < 1e-8, "{}", s.mass());
        assert!(s.ode_residual() < 1e-8, "{}", s.ode_residual());
        assert!(s.g_s.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(s.g_s[s.len() - 1], 0.8);
    }

    #[test]
    fn intensity_uses_the_optics_path() {
        let s = solve(&fig2(40.0));
        let g = optics::basic_intensity(&s.z, &s.varpi, &s.geometry, 0.5, 0.8).unwrap();
        assert_eq!(g.g, s.g_s);
    }

    #[test]
    fn sublayer_near_mid_height_at_normal_incidence() {
        for p in [fig2(0.0), fig3(0.0)] {
            let layer = solve(&p).sublayer_position();
            assert!(!layer.uniform);
            assert!((0.4..0.6).contains(&layer.z), "{}", layer.z);
        }
    }

    #[test]
    fn self_shading_raises_and_lifts_sublayer() {
        for make in [fig2 as fn(f64) -> SuspensionParams, fig3] {
            let mut prev: Option<Sublayer> = None;
            for theta in [0.0, 20.0, 40.0, 60.0, 80.0] {
                let layer = solve(&make(theta)).sublayer_position();
                if let Some(p) = prev {
                    assert!(layer.z >= p.z, "theta {theta}");
                    assert!(layer.n_max >= p.n_max, "theta {theta}");
                }
                prev = Some(layer);
            }
        }
    }

    #[test]
    fn mesh_refinement_agrees() {
        let coarse = solve(&SuspensionParams { mesh_points: 51, ..fig2(60.0) });
        let fine = solve(&SuspensionParams { mesh_points: 101, ..fig2(60.0) });
        for (i, n) in coarse.n_s.iter().enumerate() {
            let rel = (n - fine.n_s[2 * i]).abs() / n;
            assert!(rel < 1e-5, "z = {}: {rel:e}", coarse.z[i]);
        }
    }

    #[test]
    fn resample_warm_start_matches_cold_solve() {
        let s = solve(&fig3(20.0));
        let r = s.resample(201).unwrap();
        assert!(r.shooting_iterations <= 3);
        assert!((r.n_s[200] - s.n_s[100]).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_mesh() {
        let p = fig2(0.0);
        let t = TaxisFunction::from_params(&p);
        assert_eq!(solve_on_mesh(&p, &t, &[0.0, 0.7, 0.5, 1.0], None).unwrap_err(), BasicStateError::BadMesh);
    }

    #[test]
    fn invalid_params_are_reported() {
        let p = SuspensionParams { mesh_points: 10, ..fig2(0.0) };
        assert!(matches!(
            solve_basic_state(&p, &TaxisFunction::from_params(&p)),
            Err(BasicStateError::Params(ParamError::MeshTooSmall(10)))
        ));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn conserves_cells(
            swim_speed in 0.0f64..20.0,
            optical_depth in 0.1f64..2.0,
            irradiation in 0.3f64..1.0,
            ratio in 0.55f64..1.5,
            theta in 0.0f64..80.0,
            points in 51usize..202,
            rigid in proptest::bool::ANY,
        ) {
            let p = SuspensionParams {
                swim_speed,
                optical_depth,
                irradiation_magnitude: irradiation,
                critical_intensity: ratio * irradiation,
                incidence_angle_deg: theta,
                mesh_points: points,
                top_boundary: if rigid { Boundary::Rigid } else { Boundary::StressFree },
                ..SuspensionParams::default()
            };
            let b = solve_basic_state(&p, &TaxisFunction::from_params(&p)).unwrap();
            proptest::prop_assert!((b.mass() - 1.0).abs() <= 1e-8, "mass {}", b.mass());
            proptest::prop_assert!(b.ode_residual() <= 1e-8, "residual {}", b.ode_residual());
            proptest::prop_assert!(b.n_s.iter().all(|&n| n > 0.0));
        }
    }
}
