//! Command-line front end: basic states, growth rates and neutral curves.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use biostab_core::neutral::SweptParameter;
use biostab_core::stability::Normalization;
use biostab_core::Boundary;
use clap::{Args, Parser, Subcommand};

/// Linear stability of a phototactic suspension heated from below.
#[derive(Parser, Debug)]
#[command(name = "biostab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a config, report every violated invariant and the optical geometry.
    Validate(Common),
    /// Solve the equilibrium and write its profiles.
    BasicState(Common),
    /// Leading growth rate at one (k, R_b, R_T).
    Growth(GrowthArgs),
    /// Neutral curve for the configured angle (or each angle of --theta).
    NeutralCurve(CurveArgs),
    /// Neutral curves over a list of angles, with summary and overlay plot.
    Sweep(CurveArgs),
    /// Check the solvers against reference solutions.
    Selftest,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Parameter file (`key = value` per line).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "biostab-out")]
    out: PathBuf,
    /// Overrides top_boundary from the config.
    #[arg(long, value_parser = parse_boundary)]
    top: Option<Boundary>,
    /// Incidence angles in degrees, comma separated.
    #[arg(long)]
    theta: Option<String>,
    /// Worker threads for sweeps; BIOSTAB_JOBS is used when absent.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct GrowthArgs {
    #[command(flatten)]
    common: Common,
    /// Horizontal wavenumber.
    #[arg(long)]
    k: f64,
    /// Overrides rayleigh_bio.
    #[arg(long)]
    rb: Option<f64>,
    /// Overrides rayleigh_thermal.
    #[arg(long)]
    rt: Option<f64>,
    /// Vertical mode of the starting guess.
    #[arg(long, default_value_t = 1)]
    mode: usize,
    /// Also write eigenfunctions.csv.
    #[arg(long)]
    eigenfunctions: bool,
    /// Start Newton from this real growth rate instead of the leading-mode search.
    #[arg(long, allow_hyphen_values = true)]
    guess: Option<f64>,
    /// Eigenfunction scaling: wall (wall shear) or temperature (DT(0) = 1,
    /// needed for modes with W identically zero).
    #[arg(long, default_value = "wall", value_parser = parse_normalization)]
    normalize: Normalization,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.5)]
    k_min: f64,
    #[arg(long, default_value_t = 10.0)]
    k_max: f64,
    #[arg(long, default_value_t = 0.1)]
    k_step: f64,
    /// Rayleigh number solved for: rb (R_T fixed) or rt (R_b fixed).
    #[arg(long, default_value = "rb", value_parser = parse_swept)]
    sweep: SweptParameter,
    /// Vertical mode of the branch to follow.
    #[arg(long, default_value_t = 1)]
    mode: usize,
    /// Skip the local refinement around the minimum.
    #[arg(long)]
    no_refine: bool,
}

fn parse_boundary(s: &str) -> Result<Boundary, String> {
    s.parse()
}

fn parse_normalization(s: &str) -> Result<Normalization, String> {
    match s {
        "wall" => Ok(Normalization::WallShear),
        "temperature" => Ok(Normalization::TemperatureSlope),
        other => Err(format!("unknown normalization `{other}` (expected wall or temperature)")),
    }
}

fn parse_swept(s: &str) -> Result<SweptParameter, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Validate(c) => commands::validate(&c),
        Command::BasicState(c) => commands::basic_state(&c),
        Command::Growth(g) => commands::growth(&g),
        Command::NeutralCurve(a) => commands::neutral(&a, false),
        Command::Sweep(a) => commands::neutral(&a, true),
        Command::Selftest => commands::selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
