use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn biostab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biostab")).args(args).env_remove("BIOSTAB_JOBS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn config(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn field(out: &str, key: &str) -> f64 {
    let line = out.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no `{key}` in {out}"));
    line.split('=').nth(1).unwrap().trim().parse().unwrap()
}

const FIG2: &str = "swim_speed = 10\noptical_depth = 0.5\ncritical_intensity = 0.63\nrayleigh_thermal = 50\ntop_boundary = free\n";

#[test]
fn validate_accepts_and_overrides_top() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "a.cfg", FIG2);
    let o = biostab(&["validate", "--config", &cfg, "--top", "rigid"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("top_boundary = rigid"));
    assert!(stdout(&o).contains("# cos refraction = 1.00000000e0"));
}

#[test]
fn config_errors_name_line_and_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "bad.cfg", "# header\nprandtl = 5\nswim_sped = 10\n");
    let o = biostab(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let cfg = config(&dir, "range.cfg", "incidence_angle_deg = -1\nmesh_points = 11\n");
    let o = biostab(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("incidence angle out of range") && err.contains("mesh below 51"), "{err}");
}

#[test]
fn missing_file_exits_2_with_path() {
    let o = biostab(&["basic-state", "--config", "/no/such/dir/params.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/such/dir/params.cfg"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "a.cfg", FIG2);
    assert_eq!(biostab(&["sweep", "--config", &cfg, "--theta", ""]).status.code(), Some(2));
    assert_eq!(biostab(&["sweep", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(biostab(&["growth", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(biostab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(biostab(&["basic-state", "--config", &cfg, "--top", "sticky"]).status.code(), Some(2));
}

#[test]
fn basic_state_csv_and_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "a.cfg", FIG2);
    let out = dir.path().join("out");
    let o = biostab(&["basic-state", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("basic_state.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "z,varpi,n_s,T_s,G_s,M_s,dMdG");
    assert_eq!(lines.count(), 101);
    let summary = stdout(&o);
    let z: f64 = summary.split("sublayer z = ").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!((0.4..0.65).contains(&z), "{summary}");
}

#[test]
fn cell_free_basic_state_is_uniform() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "a.cfg", "swim_speed = 0\n");
    let out = dir.path().join("out");
    let o = biostab(&["basic-state", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("basic_state.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let n: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(n, 1.0);
    }
}

#[test]
fn growth_at_convection_threshold() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "a.cfg", "swim_speed = 0\ntop_boundary = rigid\n");
    let out = dir.path().join("out");
    let o = biostab(&[
        "growth", "--config", &cfg, "--out", out.to_str().unwrap(), "--k", "3.117", "--rb", "0", "--rt", "1707.76",
        "--eigenfunctions",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(field(&s, "Re(sigma)").abs() < 1e-3, "{s}");
    assert!(s.contains("branch = stationary") && s.contains("mode = 1"));
    let csv = std::fs::read_to_string(out.join("eigenfunctions.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "z,Re_W,Im_W,Re_Phi,Im_Phi,Re_Theta,Im_Theta,Re_T,Im_T");
}

#[test]
fn growth_diffusion_mode() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "a.cfg", "swim_speed = 0\nrayleigh_thermal = 0\n");
    let out = dir.path().join("out");
    let o = biostab(&[
        "growth", "--config", &cfg, "--out", out.to_str().unwrap(), "--k", "2", "--normalize", "temperature",
        "--guess", "-12",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let exact = -(4.0 + std::f64::consts::PI.powi(2));
    assert!((field(&stdout(&o), "Re(sigma)") - exact).abs() < 1e-6);
}

#[test]
fn growth_non_convergence_exits_3_with_history() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "a.cfg", "optical_depth = 1\ncritical_intensity = 0.495\ntop_boundary = rigid\n");
    let out = dir.path().join("out");
    let o = biostab(&["growth", "--config", &cfg, "--out", out.to_str().unwrap(), "--k", "1e-6", "--rb", "1e6"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let history = out.join("residual_history.txt");
    assert!(stderr(&o).contains(history.to_str().unwrap()));
    let text = std::fs::read_to_string(history).unwrap();
    assert!(text.lines().filter(|l| !l.starts_with('#')).count() > 1);
}

fn sweep(out: &Path, cfg: &str, jobs_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_biostab"));
    cmd.args([
        "sweep", "--config", cfg, "--out", out.to_str().unwrap(), "--theta", "80,0", "--k-min", "2", "--k-max", "4",
        "--k-step", "0.25",
    ]);
    match jobs_env {
        Some(j) => cmd.env("BIOSTAB_JOBS", j),
        None => cmd.env_remove("BIOSTAB_JOBS"),
    };
    cmd.output().unwrap()
}

#[test]
fn sweep_outputs_and_determinism() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "a.cfg", &format!("{FIG2}mesh_points = 51\n"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = sweep(&a, &cfg, None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = sweep(&b, &cfg, Some("2"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    for name in ["curve_theta_0.csv", "curve_theta_80.csv", "summary.json", "neutral_curves.svg"] {
        let x = std::fs::read(a.join(name)).unwrap();
        let y = std::fs::read(b.join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
    let csv = std::fs::read_to_string(a.join("curve_theta_0.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "k,R,Im_sigma,branch,mode");

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    let rows = summary.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["theta_i"], 0.0);
    for row in rows {
        assert_eq!(row["status"], "ok");
        let (k, l) = (row["k_c"].as_f64().unwrap(), row["lambda_c"].as_f64().unwrap());
        assert!((k * l - 2.0 * std::f64::consts::PI).abs() < 1e-7);
        assert!(row["branch"].is_string() && row["mode"].is_u64() && row["R_c"].is_f64());
    }
    assert!(rows[1]["R_c"].as_f64().unwrap() < rows[0]["R_c"].as_f64().unwrap());

    let svg = std::fs::read_to_string(a.join("neutral_curves.svg")).unwrap();
    assert!(svg.contains(r#"version="1.1""#) && svg.contains("θi = 0°") && svg.contains("θi = 80°"));
    assert!(svg.matches("<polyline").count() >= 2);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["theta_i"], serde_json::json!([0.0, 80.0]));
}

#[test]
fn bad_jobs_env_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "a.cfg", FIG2);
    let o = sweep(&dir.path().join("o"), &cfg, Some("lots"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let o = biostab(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("10 of 10 checks passed"));
}
