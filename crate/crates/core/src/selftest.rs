//! Installation check against the reference solutions.
//!
//! Each check is small enough to run in well under a second in an
//! optimized build.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::basic_state::solve_basic_state;
use crate::oracle::{
    analytic_concentration, benard_critical, benard_neutral, fd_derivative_check, taxis_derivative_check,
    BenardSetup, BoundaryPair,
};
use crate::params::{refract, Boundary, SuspensionParams, TaxisForm};
use crate::phototaxis::TaxisFunction;
use crate::stability::{assemble, growth_rate, growth_rate_with, rightmost_refined, Normalization, NrkOptions, Seed};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn failed(name: &'static str, err: impl std::fmt::Display) -> Check {
    check(name, false, format!("error: {err}"))
}

/// Runs every check in a fixed order.
pub fn selftest() -> Vec<Check> {
    vec![
        free_free_closed_form(),
        benard_minimum("rigid-rigid convection minimum", BoundaryPair::RigidRigid, 3.117, 1707.762),
        benard_minimum("rigid-free convection minimum", BoundaryPair::RigidFree, 2.682, 1100.65),
        analytic_profile(),
        derivative_audit(),
        snell_bound(),
        constant_taxis_basic_state(),
        diffusion_growth_rate(),
        nrk_benard(),
        nrk_vs_dense(),
    ]
}

fn free_free_closed_form() -> Check {
    let r = benard_neutral(BenardSetup { walls: BoundaryPair::FreeFree, wavenumber: PI / 2f64.sqrt() });
    let exact = 27.0 * PI.powi(4) / 4.0;
    check("free-free neutral curve minimum", (r - exact).abs() < 1e-9, format!("R = {r:.6}, expected {exact:.6}"))
}

fn benard_minimum(name: &'static str, walls: BoundaryPair, k_ref: f64, r_ref: f64) -> Check {
    let (k, r) = benard_critical(walls);
    let ok = (k - k_ref).abs() < 1e-3 * k_ref && (r - r_ref).abs() < 1e-4 * r_ref;
    check(name, ok, format!("k_c = {k:.4}, R_c = {r:.3}"))
}

fn analytic_profile() -> Check {
    let n0 = analytic_concentration(1.0, 1.0).eval(0.0);
    let ratio = analytic_concentration(5.0, 1.0).eval(1.0) / analytic_concentration(5.0, 1.0).eval(0.0);
    let ok = (n0 - 1.0 / (std::f64::consts::E - 1.0)).abs() < 1e-12 && (ratio - 5f64.exp()).abs() < 1e-9;
    check("closed-form concentration", ok, format!("n(0) = {n0:.6}, n(1)/n(0) = {ratio:.4}"))
}

fn derivative_audit() -> Check {
    let good = fd_derivative_check(f64::sin, f64::cos, (0.0, 1.0), 1e-6);
    let bad = fd_derivative_check(f64::sin, f64::sin, (0.0, 1.0), 1e-6);
    let p = SuspensionParams::default();
    let taxis = taxis_derivative_check(&TaxisFunction::from_params(&p), 2.0 * p.critical_intensity, 1e-6);
    check(
        "phototaxis derivative audit",
        good.passed && !bad.passed && taxis.passed,
        format!("max relative error {:.1e}", taxis.max_error),
    )
}

fn snell_bound() -> Check {
    let lowest = (0..=900)
        .map(|i| refract(i as f64 * 0.1, 1.333).cos_refraction)
        .fold(f64::INFINITY, f64::min);
    check("refraction cosine bound", lowest >= 0.661, format!("min cos = {lowest:.5}"))
}

fn constant_taxis_basic_state() -> Check {
    let name = "constant-taxis basic state";
    let params = SuspensionParams {
        swim_speed: 5.0,
        taxis_form: TaxisForm::Constant,
        taxis_amplitude: 1.0,
        ..SuspensionParams::default()
    };
    let basic = match solve_basic_state(&params, &TaxisFunction::from_params(&params)) {
        Ok(b) => b,
        Err(e) => return failed(name, e),
    };
    let exact = analytic_concentration(5.0, 1.0);
    let err = basic.z.iter().zip(&basic.n_s).map(|(&z, &n)| (n - exact.eval(z)).abs()).fold(0.0, f64::max);
    check(name, err <= 1e-8, format!("max error {err:.1e}"))
}

fn cell_free(top: Boundary) -> SuspensionParams {
    SuspensionParams { swim_speed: 0.0, top_boundary: top, ..SuspensionParams::default() }
}

fn diffusion_growth_rate() -> Check {
    let name = "diffusion growth rate";
    let params = cell_free(Boundary::StressFree);
    let run = || -> Result<Complex64, Box<dyn std::error::Error>> {
        let basic = solve_basic_state(&params, &TaxisFunction::from_params(&params))?;
        let problem = assemble(&basic, 2.0, 0.0, 0.0, Boundary::StressFree)?;
        let options = NrkOptions { normalization: Normalization::TemperatureSlope, ..NrkOptions::default() };
        let seed = Seed::Sinusoidal { sigma: Complex64::new(-13.0, 0.0), mode: 1 };
        Ok(growth_rate_with(&problem, seed, &options)?.sigma)
    };
    match run() {
        Ok(s) => {
            let exact = -(4.0 + PI * PI);
            check(name, (s.re - exact).abs() < 1e-6 * exact.abs(), format!("sigma = {:.8}", s.re))
        }
        Err(e) => failed(name, e),
    }
}

fn nrk_benard() -> Check {
    let name = "collocation at the convection threshold";
    let params = SuspensionParams { bottom_boundary: Boundary::Rigid, ..cell_free(Boundary::Rigid) };
    let r_t = benard_neutral(BenardSetup { walls: BoundaryPair::RigidRigid, wavenumber: 3.117 });
    let run = || -> Result<Complex64, Box<dyn std::error::Error>> {
        let basic = solve_basic_state(&params, &TaxisFunction::from_params(&params))?;
        let problem = assemble(&basic, 3.117, 0.0, r_t, Boundary::Rigid)?;
        Ok(growth_rate(&problem, Seed::default())?.sigma)
    };
    match run() {
        Ok(s) => check(name, s.re.abs() < 1e-6, format!("Re sigma = {:.2e} at R_T = {r_t:.3}", s.re)),
        Err(e) => failed(name, e),
    }
}

fn nrk_vs_dense() -> Check {
    let name = "collocation against dense spectrum";
    let params = SuspensionParams { incidence_angle_deg: 40.0, mesh_points: 51, ..SuspensionParams::default() };
    let run = || -> Result<(Complex64, Complex64), Box<dyn std::error::Error>> {
        let basic = solve_basic_state(&params, &TaxisFunction::from_params(&params))?;
        let problem = assemble(&basic, 2.0, 80.0, 50.0, Boundary::StressFree)?;
        let nrk = growth_rate(&problem, Seed::Rightmost)?.sigma;
        Ok((nrk, rightmost_refined(&problem)?))
    };
    match run() {
        Ok((a, b)) => {
            let rel = (a - b).norm() / b.norm().max(1.0);
            check(name, rel < 1e-4, format!("{a:.6} vs {b:.6} (rel {rel:.1e})"))
        }
        Err(e) => failed(name, e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let rows = selftest();
        assert_eq!(rows.len(), 10);
        for row in rows {
            assert!(row.passed, "{}: {}", row.name, row.detail);
        }
    }
}
