//! One line per acceptance criterion; exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use biostab_core::neutral::{critical_point, NeutralCurve, NeutralOptions, NeutralSolver, SweptParameter};
use biostab_core::oracle::{analytic_concentration, benard_critical, BoundaryPair};
use biostab_core::stability::{assemble, growth_rate, rightmost_refined, Seed};
use biostab_core::{refract, solve_basic_state, Boundary, Branch, SuspensionParams, TaxisForm, TaxisFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn cell_free(bottom: Boundary, top: Boundary) -> SuspensionParams {
    SuspensionParams {
        swim_speed: 0.0,
        rayleigh_bio: 0.0,
        bottom_boundary: bottom,
        top_boundary: top,
        ..SuspensionParams::default()
    }
}

fn stress_free_top(theta: f64, points: usize) -> SuspensionParams {
    SuspensionParams { incidence_angle_deg: theta, mesh_points: points, ..SuspensionParams::default() }
}

fn rigid_top(theta: f64) -> SuspensionParams {
    SuspensionParams {
        incidence_angle_deg: theta,
        optical_depth: 1.0,
        critical_intensity: 0.495,
        top_boundary: Boundary::Rigid,
        ..SuspensionParams::default()
    }
}

fn curve(params: &SuspensionParams, swept: SweptParameter, range: (f64, f64), step: f64) -> Result<NeutralCurve, String> {
    NeutralSolver::new(params, swept, NeutralOptions::default())
        .and_then(|s| s.trace(range, step))
        .map_err(|e| e.to_string())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn benard_limit(bottom: Boundary, top: Boundary, walls: BoundaryPair, range: (f64, f64)) -> Outcome {
    let (k_ref, r_ref) = benard_critical(walls);
    let c = curve(&cell_free(bottom, top), SweptParameter::RayleighThermal, range, 0.1)?;
    let cp = critical_point(&c).map_err(|e| e.to_string())?;
    let ok = rel(cp.k_c, k_ref) <= 5e-3 && rel(cp.r_c, r_ref) <= 5e-3;
    Ok((ok, format!("k_c = {:.4} (oracle {k_ref:.4}), R_T_c = {:.3} (oracle {r_ref:.3})", cp.k_c, cp.r_c)))
}

fn c1() -> Outcome {
    benard_limit(Boundary::Rigid, Boundary::Rigid, BoundaryPair::RigidRigid, (2.5, 3.8))
}

fn c2() -> Outcome {
    benard_limit(Boundary::Rigid, Boundary::StressFree, BoundaryPair::RigidFree, (2.1, 3.3))
}

fn c3() -> Outcome {
    // A step of 0.221 puts 2.221 on the grid next to 2 and 3.
    let c = curve(&cell_free(Boundary::StressFree, Boundary::StressFree), SweptParameter::RayleighThermal, (2.0, 3.0), 0.221)?;
    let mut worst: f64 = 0.0;
    for k in [2.0, 2.221, 3.0] {
        let p = c.points.iter().find(|p| (p.k - k).abs() < 1e-9).ok_or(format!("no point at k = {k}"))?;
        worst = worst.max(rel(p.r, (k * k + PI * PI).powi(3) / (k * k)));
    }
    Ok((worst <= 1e-3, format!("max relative deviation {worst:.2e}")))
}

fn c4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut mass_err, mut residual): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let irradiation = rng.random_range(0.3..1.0);
        let p = SuspensionParams {
            prandtl: rng.random_range(1.0..10.0),
            lewis: rng.random_range(1.0..10.0),
            swim_speed: rng.random_range(0.0..20.0),
            optical_depth: rng.random_range(0.1..2.0),
            irradiation_magnitude: irradiation,
            critical_intensity: rng.random_range(0.55..1.5) * irradiation,
            incidence_angle_deg: rng.random_range(0.0..80.0),
            mesh_points: rng.random_range(51..202),
            top_boundary: if rng.random_bool(0.5) { Boundary::Rigid } else { Boundary::StressFree },
            ..SuspensionParams::default()
        };
        let b = solve_basic_state(&p, &TaxisFunction::from_params(&p)).map_err(|e| e.to_string())?;
        mass_err = mass_err.max((b.mass() - 1.0).abs());
        residual = residual.max(b.ode_residual());
    }
    Ok((mass_err <= 1e-8 && residual <= 1e-8, format!("max |mass - 1| = {mass_err:.1e}, max residual = {residual:.1e}")))
}

fn c5() -> Outcome {
    let mut worst: f64 = 0.0;
    for lambda in [0.5, 1.0, 5.0] {
        let p = SuspensionParams {
            swim_speed: lambda,
            taxis_form: TaxisForm::Constant,
            taxis_amplitude: 1.0,
            ..SuspensionParams::default()
        };
        let b = solve_basic_state(&p, &TaxisFunction::from_params(&p)).map_err(|e| e.to_string())?;
        let exact = analytic_concentration(lambda, 1.0);
        for (&z, &n) in b.z.iter().zip(&b.n_s) {
            worst = worst.max((n - exact.eval(z)).abs());
        }
    }
    Ok((worst <= 1e-8, format!("max |n_s - closed form| = {worst:.1e}")))
}

fn c6() -> Outcome {
    let coarse = solve_basic_state(&stress_free_top(0.0, 51), &TaxisFunction::from_params(&stress_free_top(0.0, 51)))
        .map_err(|e| e.to_string())?;
    let fine = solve_basic_state(&stress_free_top(0.0, 101), &TaxisFunction::from_params(&stress_free_top(0.0, 101)))
        .map_err(|e| e.to_string())?;
    let (k, rb, rt) = (3.0, 300.0, 50.0);
    let a = growth_rate(&assemble(&coarse, k, rb, rt, Boundary::StressFree).map_err(|e| e.to_string())?, Seed::Rightmost)
        .map_err(|e| e.to_string())?;
    let b = growth_rate(&assemble(&fine, k, rb, rt, Boundary::StressFree).map_err(|e| e.to_string())?, Seed::Previous(&a))
        .map_err(|e| e.to_string())?;
    let sigma_rel = (a.sigma - b.sigma).norm() / b.sigma.norm();

    let crit = |points| -> Result<f64, String> {
        let c = curve(&stress_free_top(0.0, points), SweptParameter::RayleighBio, (2.5, 3.6), 0.1)?;
        Ok(critical_point(&c).map_err(|e| e.to_string())?.r_c)
    };
    let (r51, r101) = (crit(51)?, crit(101)?);
    let r_rel = rel(r51, r101);
    Ok((
        sigma_rel <= 5e-6 && r_rel <= 5e-6,
        format!(
            "sigma {:.7} vs {:.7} (rel {sigma_rel:.1e}); R_b_c {r51:.6} vs {r101:.6} (rel {r_rel:.1e})",
            a.sigma.re, b.sigma.re
        ),
    ))
}

const ANGLES: [f64; 5] = [0.0, 20.0, 40.0, 60.0, 80.0];

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn nondecreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0])
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

/// Critical points and sublayer positions over the angle grid.
fn headline(make: impl Fn(f64) -> SuspensionParams, need_stationary: bool) -> Outcome {
    let (mut rc, mut kc, mut sub, mut branches) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for theta in ANGLES {
        let params = make(theta);
        let basic = solve_basic_state(&params, &TaxisFunction::from_params(&params)).map_err(|e| e.to_string())?;
        sub.push(basic.sublayer_position().z);
        let c = curve(&params, SweptParameter::RayleighBio, (0.5, 10.0), 0.1)?;
        let cp = critical_point(&c).map_err(|e| format!("theta {theta}: {e}"))?;
        rc.push(cp.r_c);
        kc.push(cp.k_c);
        branches.push(cp.branch);
    }
    let stationary = branches.iter().all(|b| *b == Branch::Stationary);
    let checks = [
        ("R_b_c nonincreasing", nonincreasing(&rc)),
        ("k_c nonincreasing", nonincreasing(&kc)),
        ("sublayer nondecreasing", nondecreasing(&sub)),
        ("all stationary", !need_stationary || stationary),
    ];
    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    let labels: Vec<&str> = branches.iter().map(|b| b.as_str()).collect();
    Ok((
        failed.is_empty(),
        format!(
            "R_b_c [{}]; k_c [{}]; sublayer [{}]; branch [{}]{}",
            fmt_list(&rc),
            fmt_list(&kc),
            fmt_list(&sub),
            labels.join(", "),
            if failed.is_empty() { String::new() } else { format!("; violated: {}", failed.join(", ")) }
        ),
    ))
}

fn c7() -> Outcome {
    headline(|t| stress_free_top(t, 101), false)
}

fn c8() -> Outcome {
    headline(rigid_top, true)
}

fn c9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let theta = rng.random_range(0.0..80.0);
        let mut params = if rng.random_bool(0.5) { stress_free_top(theta, 101) } else { rigid_top(theta) };
        params.mesh_points = 101;
        let basic = solve_basic_state(&params, &TaxisFunction::from_params(&params)).map_err(|e| e.to_string())?;
        let (k, rb, rt) = (rng.random_range(1.0..5.0), rng.random_range(0.0..300.0), rng.random_range(0.0..100.0));
        let problem = assemble(&basic, k, rb, rt, params.top_boundary).map_err(|e| e.to_string())?;
        let nrk = growth_rate(&problem, Seed::Rightmost).map_err(|e| e.to_string())?.sigma;
        let dense = rightmost_refined(&problem).map_err(|e| e.to_string())?;
        worst = worst.max((nrk - dense).norm() / dense.norm().max(1.0));
    }
    Ok((worst <= 1e-4, format!("max relative difference {worst:.1e}")))
}

fn c10() -> Outcome {
    let lowest = (0..=900).map(|i| refract(i as f64 * 0.1, 1.333).cos_refraction).fold(f64::INFINITY, f64::min);
    Ok((lowest >= 0.661, format!("min cos = {lowest:.6}")))
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 10] = [
        (1, "rigid-rigid convection limit", Duration::from_secs(10), c1),
        (2, "rigid-free convection limit", Duration::from_secs(10), c2),
        (3, "free-free closed-form curve", Duration::from_secs(5), c3),
        (4, "basic-state conservation", Duration::from_secs(10), c4),
        (5, "constant-taxis basic state", Duration::from_secs(2), c5),
        (6, "mesh convergence", Duration::from_secs(60), c6),
        (7, "monotonicity, stress-free top", Duration::from_secs(600), c7),
        (8, "monotonicity and stationarity, rigid top", Duration::from_secs(600), c8),
        (9, "collocation vs dense spectrum", Duration::from_secs(300), c9),
        (10, "refraction cosine bound", Duration::from_secs(1), c10),
    ];
    let mut failures = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= budget;
        let pass = ok && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "{} {id:>2} {name}: {detail} [{:.1} s of {} s{}]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
