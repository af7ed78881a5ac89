//! Subcommand bodies.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use biostab_core::config::{parse_unvalidated, to_config_string, ConfigError};
use biostab_core::neutral::{
    critical_point, mode_number, oscillatory_bifurcation, Gap, NeutralCurve, NeutralOptions, NeutralSolver,
    SweptParameter,
};
use biostab_core::stability::{
    classify, growth_rate_with, spectrum_oracle, Normalization, NrkOptions, Seed, CLASSIFY_TOL,
};
use biostab_core::{solve_basic_state, StabilityError, SuspensionParams, TaxisFunction};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{self, fmt9, round9, SummaryRow};
use crate::{Common, CurveArgs, GrowthArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(ConfigError),
    Io { path: PathBuf, source: std::io::Error },
    Solver(String),
    NotConverged { message: String, history: PathBuf },
    Selftest(usize),
}

impl CliError {
    /// 2 for anything the user can fix in the invocation or config, 3 for
    /// numerical failures.
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Solver(_) | CliError::NotConverged { .. } | CliError::Selftest(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Solver(m) => write!(f, "{m}"),
            CliError::NotConverged { message, history } => {
                write!(f, "{message}; residual history written to {}", history.display())
            }
            CliError::Selftest(n) => write!(f, "{n} selftest check(s) failed"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read_params(common: &Common) -> Result<SuspensionParams> {
    let text = std::fs::read_to_string(&common.config).map_err(|source| {
        CliError::Config(ConfigError::Io { path: common.config.display().to_string(), source })
    })?;
    let mut params = parse_unvalidated(&text)?;
    if let Some(top) = common.top {
        params.top_boundary = top;
    }
    Ok(params)
}

fn validated(params: SuspensionParams) -> Result<SuspensionParams> {
    params.validate().map_err(|e| CliError::Config(ConfigError::Invalid(e)))
}

/// Comma-separated angles, sorted ascending without duplicates.
pub fn parse_theta_list(s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let v: f64 = item.parse().map_err(|_| CliError::Usage(format!("--theta: `{item}` is not a number")))?;
        if !v.is_finite() {
            return Err(CliError::Usage(format!("--theta: `{item}` is not finite")));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(CliError::Usage("--theta: empty angle list".to_string()));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

/// Single angle override for the commands that solve one problem.
fn single_theta(common: &Common, params: &mut SuspensionParams) -> Result<()> {
    if let Some(list) = &common.theta {
        let v = parse_theta_list(list)?;
        if v.len() != 1 {
            return Err(CliError::Usage("--theta takes a single angle for this command".to_string()));
        }
        params.incidence_angle_deg = v[0];
    }
    Ok(())
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn out_dir(common: &Common) -> Result<&Path> {
    std::fs::create_dir_all(&common.out).map_err(|source| CliError::Io { path: common.out.clone(), source })?;
    Ok(&common.out)
}

/// Thread count: `--jobs`, else `BIOSTAB_JOBS`, else 0 (all cores).
pub fn resolve_jobs(flag: Option<usize>, env: Option<&str>) -> Result<usize> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match env.map(str::trim).filter(|s| !s.is_empty()) {
        Some(s) => s.parse().map_err(|_| CliError::Usage(format!("BIOSTAB_JOBS must be a non-negative integer, got `{s}`"))),
        None => Ok(0),
    }
}

pub fn validate(common: &Common) -> Result<()> {
    let mut params = read_params(common)?;
    single_theta(common, &mut params)?;
    let errs = params.violations();
    if !errs.is_empty() {
        for e in &errs {
            eprintln!("invalid: {e}");
        }
        return Err(CliError::Config(ConfigError::Invalid(errs[0].clone())));
    }
    print!("{}", to_config_string(&params));
    let g = params.geometry();
    println!("# refraction angle (deg) = {}", fmt9(g.refraction_angle_rad.to_degrees()));
    println!("# cos refraction = {}", fmt9(g.cos_refraction));
    println!("# slant factor = {}", fmt9(g.slant_factor));
    Ok(())
}

pub fn basic_state(common: &Common) -> Result<()> {
    let mut params = read_params(common)?;
    single_theta(common, &mut params)?;
    let params = validated(params)?;
    let basic = solve_basic_state(&params, &TaxisFunction::from_params(&params))
        .map_err(|e| CliError::Solver(e.to_string()))?;
    let dir = out_dir(common)?;
    let path = dir.join("basic_state.csv");
    write(&path, &output::basic_state_csv(&basic))?;
    let sub = basic.sublayer_position();
    println!("wrote {}", path.display());
    println!(
        "max n_s = {}  sublayer z = {}{}  G_s(0) = {}",
        fmt9(sub.n_max),
        fmt9(sub.z),
        if sub.uniform { " (uniform)" } else { "" },
        fmt9(basic.g_s[0])
    );
    Ok(())
}

pub fn growth(args: &GrowthArgs) -> Result<()> {
    let common = &args.common;
    let mut params = read_params(common)?;
    single_theta(common, &mut params)?;
    if let Some(rb) = args.rb {
        params.rayleigh_bio = rb;
    }
    if let Some(rt) = args.rt {
        params.rayleigh_thermal = rt;
    }
    let params = validated(params)?;
    if !(args.k > 0.0 && args.k.is_finite()) {
        return Err(CliError::Usage(format!("--k must be positive, got {}", args.k)));
    }
    if args.mode == 0 {
        return Err(CliError::Usage("--mode starts at 1".to_string()));
    }
    let options = NeutralOptions { mode: args.mode, ..NeutralOptions::default() };
    let solver = NeutralSolver::new(&params, SweptParameter::RayleighBio, options)
        .map_err(|e| CliError::Solver(e.to_string()))?;
    let dir = out_dir(common)?;
    let problem = solver.problem(args.k, params.rayleigh_bio).map_err(|e| CliError::Solver(e.to_string()))?;
    let solved = match (args.guess, args.normalize) {
        (None, Normalization::WallShear) => solver.leading(args.k, params.rayleigh_bio, None),
        (guess, normalization) => {
            let sigma = Complex64::new(guess.unwrap_or(0.0), 0.0);
            let options = NrkOptions { normalization, ..NrkOptions::default() };
            growth_rate_with(&problem, Seed::Sinusoidal { sigma, mode: args.mode }, &options)
        }
    };
    let res = match solved {
        Ok(r) => r,
        Err(e) => return Err(not_converged(dir, &e)?),
    };
    let lead = spectrum_oracle(&problem)[0];
    if lead.re > res.sigma.re + 0.05 * lead.norm().max(1.0) {
        eprintln!(
            "note: the dense spectrum has a mode near {} + {}i to the right of this one",
            fmt9(lead.re),
            fmt9(lead.im)
        );
    }
    let branch = classify(&res, CLASSIFY_TOL).map_err(|e| CliError::Solver(e.to_string()))?;
    // Modes with W identically zero have no cell count.
    let w_max = res.w.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let mode = match mode_number(&res.w) {
        Ok(m) if w_max > 1e-10 => m.to_string(),
        _ => "-".to_string(),
    };
    println!("Re(sigma) = {}", fmt9(res.sigma.re));
    println!("Im(sigma) = {}", fmt9(res.sigma.im));
    println!("branch = {branch}");
    println!("mode = {mode}");
    println!("iterations = {}", res.iterations);
    println!("residual = {}", fmt9(res.residual));
    if args.eigenfunctions {
        let path = dir.join("eigenfunctions.csv");
        write(&path, &output::eigenfunction_csv(&res))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn not_converged(dir: &Path, e: &StabilityError) -> Result<CliError> {
    let path = dir.join("residual_history.txt");
    let mut text = format!("# {e}\n# iteration,residual\n");
    for (i, r) in e.residual_history().unwrap_or(&[]).iter().enumerate() {
        text.push_str(&format!("{i},{}\n", fmt9(*r)));
    }
    write(&path, &text)?;
    Ok(CliError::NotConverged { message: e.to_string(), history: path })
}

/// Outcome of one angle of a sweep.
struct Line {
    theta: f64,
    curve: Option<NeutralCurve>,
    row: SummaryRow,
    k_b: Option<f64>,
}

fn solve_line(params: &SuspensionParams, theta: f64, args: &CurveArgs) -> Line {
    let params = SuspensionParams { incidence_angle_deg: theta, ..params.clone() };
    let options = NeutralOptions { mode: args.mode, refine: !args.no_refine, ..NeutralOptions::default() };
    let curve = NeutralSolver::new(&params, args.sweep, options).and_then(|s| s.trace((args.k_min, args.k_max), args.k_step));
    match curve {
        Ok(curve) => {
            let row = match critical_point(&curve) {
                Ok(c) => SummaryRow::ok(theta, &c),
                Err(e) => SummaryRow::failed(theta, &e.to_string()),
            };
            let k_b = oscillatory_bifurcation(&curve).map(|b| b.k_b);
            Line { theta, curve: Some(curve), row, k_b }
        }
        Err(e) => Line { theta, curve: None, row: SummaryRow::failed(theta, &e.to_string()), k_b: None },
    }
}

fn angle_label(theta: f64) -> String {
    let s = format!("{theta:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    params: &'a SuspensionParams,
    swept_parameter: &'static str,
    theta_i: &'a [f64],
    k_range: (f64, f64),
    k_step: f64,
    mode: usize,
    output_dir: String,
    jobs: usize,
    elapsed_seconds: f64,
    lines: Vec<ManifestLine<'a>>,
}

#[derive(Serialize)]
struct ManifestLine<'a> {
    theta_i: f64,
    points: usize,
    gaps: &'a [Gap],
    k_b: Option<f64>,
}

pub fn neutral(args: &CurveArgs, require_list: bool) -> Result<()> {
    let common = &args.common;
    let params = read_params(common)?;
    let thetas = match &common.theta {
        Some(list) => parse_theta_list(list)?,
        None if require_list => return Err(CliError::Usage("sweep needs --theta LIST".to_string())),
        None => vec![params.incidence_angle_deg],
    };
    let params = validated(params)?;
    for &t in &thetas {
        validated(SuspensionParams { incidence_angle_deg: t, ..params.clone() })?;
    }
    if !(args.k_step > 0.0) || !(args.k_min > 0.0) || !(args.k_max > args.k_min) {
        return Err(CliError::Usage(format!(
            "need 0 < k_min < k_max and k_step > 0 (got [{}, {}] step {})",
            args.k_min, args.k_max, args.k_step
        )));
    }
    if args.mode == 0 {
        return Err(CliError::Usage("--mode starts at 1".to_string()));
    }
    let jobs = resolve_jobs(common.jobs, std::env::var("BIOSTAB_JOBS").ok().as_deref())?;
    let dir = out_dir(common)?.to_path_buf();

    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    let lines: Vec<Line> = pool.install(|| thetas.par_iter().map(|&t| solve_line(&params, t, args)).collect());
    let elapsed = start.elapsed().as_secs_f64();

    let mut overlay = Vec::new();
    for line in &lines {
        if let Some(curve) = &line.curve {
            let path = dir.join(format!("curve_theta_{}.csv", angle_label(line.theta)));
            write(&path, &output::curve_csv(curve))?;
            overlay.push((format!("θi = {}°", angle_label(line.theta)), curve));
        }
    }
    let rows: Vec<SummaryRow> = lines.iter().map(|l| l.row.clone()).collect();
    write(&dir.join("summary.json"), &output::summary_json(&rows))?;
    let y_label = match args.sweep {
        SweptParameter::RayleighBio => "R_b",
        SweptParameter::RayleighThermal => "R_T",
    };
    write(&dir.join("neutral_curves.svg"), &output::overlay_svg(&overlay, y_label, args.k_step))?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        params: &params,
        swept_parameter: args.sweep.as_str(),
        theta_i: &thetas,
        k_range: (args.k_min, args.k_max),
        k_step: args.k_step,
        mode: args.mode,
        output_dir: dir.display().to_string(),
        jobs,
        elapsed_seconds: round9(elapsed),
        lines: lines
            .iter()
            .map(|l| ManifestLine {
                theta_i: l.theta,
                points: l.curve.as_ref().map_or(0, |c| c.points.len()),
                gaps: l.curve.as_ref().map_or(&[], |c| c.gaps.as_slice()),
                k_b: l.k_b,
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&dir.join("manifest.json"), &(text + "\n"))?;

    println!("{:>8} {:>14} {:>14} {:>14} {:>12} {:>5}  status", "theta_i", "k_c", "R_c", "lambda_c", "branch", "mode");
    for row in &rows {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), fmt9);
        println!(
            "{:>8} {:>14} {:>14} {:>14} {:>12} {:>5}  {}",
            angle_label(row.theta_i),
            opt(row.k_c),
            opt(row.r_c),
            opt(row.lambda_c),
            row.branch.as_deref().unwrap_or("-"),
            row.mode.map_or("-".to_string(), |m| m.to_string()),
            row.status
        );
    }
    println!("wrote {}", dir.display());
    if rows.iter().all(|r| r.status != "ok") {
        return Err(CliError::Solver("no neutral curve produced a critical point".to_string()));
    }
    Ok(())
}

pub fn selftest() -> Result<()> {
    let rows = biostab_core::selftest::selftest();
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut failed = 0;
    for r in &rows {
        let mark = if r.passed { "PASS" } else { "FAIL" };
        if !r.passed {
            failed += 1;
        }
        println!("{mark}  {:<width$}  {}", r.name, r.detail);
    }
    println!("{} of {} checks passed", rows.len() - failed, rows.len());
    if failed > 0 {
        return Err(CliError::Selftest(failed));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_lists() {
        assert_eq!(parse_theta_list("40, 0,20,20").unwrap(), vec![0.0, 20.0, 40.0]);
        assert!(matches!(parse_theta_list(""), Err(CliError::Usage(_))));
        assert!(matches!(parse_theta_list(" , "), Err(CliError::Usage(_))));
        assert!(matches!(parse_theta_list("ten"), Err(CliError::Usage(_))));
    }

    #[test]
    fn jobs_precedence() {
        assert_eq!(resolve_jobs(Some(3), Some("8")).unwrap(), 3);
        assert_eq!(resolve_jobs(None, Some("8")).unwrap(), 8);
        assert_eq!(resolve_jobs(None, None).unwrap(), 0);
        assert!(resolve_jobs(None, Some("many")).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage(String::new()).code(), 2);
        assert_eq!(CliError::Solver(String::new()).code(), 3);
        assert_eq!(CliError::NotConverged { message: String::new(), history: PathBuf::new() }.code(), 3);
    }

    #[test]
    fn angle_labels() {
        assert_eq!(angle_label(40.0), "40");
        assert_eq!(angle_label(37.5), "37.5");
    }
}
