//! CSV, JSON and SVG emission.

use std::fmt::Write as _;

use biostab_core::neutral::{CriticalPoint, NeutralCurve};
use biostab_core::{BasicState, GrowthResult};
use serde::Serialize;

/// Nine significant digits in scientific notation.
pub fn fmt9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x:.8e}")
}

/// `x` rounded to nine significant digits, so JSON output is reproducible.
pub fn round9(x: f64) -> f64 {
    fmt9(x).parse().unwrap_or(x)
}

fn csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn basic_state_csv(b: &BasicState) -> String {
    csv(
        &["z", "varpi", "n_s", "T_s", "G_s", "M_s", "dMdG"],
        (0..b.len()).map(|i| {
            [b.z[i], b.varpi[i], b.n_s[i], b.t_s[i], b.g_s[i], b.m_s[i], b.dmdg[i]].map(fmt9).to_vec()
        }),
    )
}

pub fn curve_csv(curve: &NeutralCurve) -> String {
    csv(
        &["k", "R", "Im_sigma", "branch", "mode"],
        curve.points.iter().map(|p| {
            vec![fmt9(p.k), fmt9(p.r), fmt9(p.im_sigma), p.branch.as_str().to_string(), p.mode.to_string()]
        }),
    )
}

pub fn eigenfunction_csv(r: &GrowthResult) -> String {
    csv(
        &["z", "Re_W", "Im_W", "Re_Phi", "Im_Phi", "Re_Theta", "Im_Theta", "Re_T", "Im_T"],
        (0..r.z.len()).map(|i| {
            [r.z[i], r.w[i].re, r.w[i].im, r.phi[i].re, r.phi[i].im, r.theta[i].re, r.theta[i].im, r.t[i].re, r.t[i].im]
                .map(fmt9)
                .to_vec()
        }),
    )
}

/// One entry of the sweep summary.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub theta_i: f64,
    pub k_c: Option<f64>,
    #[serde(rename = "R_c")]
    pub r_c: Option<f64>,
    pub lambda_c: Option<f64>,
    pub branch: Option<String>,
    pub mode: Option<usize>,
    pub status: String,
}

impl SummaryRow {
    pub fn ok(theta: f64, c: &CriticalPoint) -> Self {
        SummaryRow {
            theta_i: round9(theta),
            k_c: Some(round9(c.k_c)),
            r_c: Some(round9(c.r_c)),
            lambda_c: Some(round9(c.lambda_c)),
            branch: Some(c.branch.as_str().to_string()),
            mode: Some(c.mode),
            status: "ok".to_string(),
        }
    }

    pub fn failed(theta: f64, reason: &str) -> Self {
        SummaryRow {
            theta_i: round9(theta),
            k_c: None,
            r_c: None,
            lambda_c: None,
            branch: None,
            mode: None,
            status: format!("error: {reason}"),
        }
    }
}

pub fn summary_json(rows: &[SummaryRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("summary rows serialize");
    s.push('\n');
    s
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// Roughly five round tick values covering `[lo, hi]`.
pub fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(x: f64) -> String {
    let s = format!("{:.6}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

/// Overlay of neutral curves, `k` against the swept Rayleigh number.
///
/// `lines` holds the legend label and the curve; consecutive points
/// further apart than `1.5 k_step` start a new polyline so gaps stay visible.
pub fn overlay_svg(lines: &[(String, &NeutralCurve)], y_label: &str, k_step: f64) -> String {
    let (width, height) = (720.0, 480.0);
    let (left, right, top, bottom) = (70.0, 150.0, 20.0, 50.0);
    let pw = width - left - right;
    let ph = height - top - bottom;

    let all = lines.iter().flat_map(|(_, c)| c.points.iter());
    let (mut kmin, mut kmax, mut rmin, mut rmax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        kmin = kmin.min(p.k);
        kmax = kmax.max(p.k);
        rmin = rmin.min(p.r);
        rmax = rmax.max(p.r);
    }
    if !kmin.is_finite() {
        (kmin, kmax, rmin, rmax) = (0.0, 1.0, 0.0, 1.0);
    }
    if kmax - kmin < 1e-12 {
        kmax = kmin + 1.0;
    }
    if rmax - rmin < 1e-12 {
        rmax = rmin + 1.0;
    }
    let pad = 0.05 * (rmax - rmin);
    let (rmin, rmax) = (rmin - pad, rmax + pad);
    let sx = |k: f64| left + (k - kmin) / (kmax - kmin) * pw;
    let sy = |r: f64| top + (rmax - r) / (rmax - rmin) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="12" fill="black">"#);
    for t in ticks(kmin, kmax) {
        let x = sx(t);
        let yb = top + ph;
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{yb}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, yb + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, yb + 18.0, tick_label(t));
    }
    for t in ticks(rmin, rmax) {
        let y = sy(t);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/>"#, left - 5.0);
        let _ =
            writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, left - 8.0, y + 4.0, tick_label(t));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">k</text>"#, left + pw / 2.0, height - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{y_label}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    let _ = writeln!(s, "</g>");

    for (i, (label, curve)) in lines.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let mut segments: Vec<Vec<(f64, f64)>> = Vec::new();
        let mut prev_k = f64::NEG_INFINITY;
        for p in &curve.points {
            if p.k - prev_k > 1.5 * k_step || segments.is_empty() {
                segments.push(Vec::new());
            }
            segments.last_mut().unwrap().push((sx(p.k), sy(p.r)));
            prev_k = p.k;
        }
        for seg in segments {
            let pts: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
        }
        let ly = top + 20.0 + 20.0 * i as f64;
        let lx = left + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{colour}" stroke-width="2"/>"#,
            lx + 25.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 32.0,
            ly + 4.0,
            escape(label)
        );
    }
    let _ = writeln!(s, "</svg>");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use biostab_core::neutral::{NeutralPoint, SweptParameter};
    use biostab_core::{Branch, SuspensionParams};

    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt9(1707.76189345), "1.70776189e3");
        assert_eq!(fmt9(-0.000123456789012), "-1.23456789e-4");
        assert_eq!(fmt9(0.0), "0");
        assert_eq!(round9(2.2214414690791831), 2.22144147);
    }

    #[test]
    fn tick_values_are_round() {
        assert_eq!(ticks(0.5, 10.0), vec![2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(ticks(62.0, 250.0), vec![100.0, 150.0, 200.0, 250.0]);
        assert_eq!(tick_label(0.30000000000000004), "0.3");
    }

    fn curve(ks: &[f64]) -> NeutralCurve {
        NeutralCurve {
            points: ks
                .iter()
                .map(|&k| NeutralPoint { k, r: 100.0 + k * k, im_sigma: 0.0, branch: Branch::Stationary, mode: 1 })
                .collect(),
            gaps: Vec::new(),
            swept: SweptParameter::RayleighBio,
            fixed_value: 50.0,
            params: SuspensionParams::default(),
        }
    }

    #[test]
    fn svg_breaks_lines_at_gaps() {
        let c = curve(&[1.0, 1.1, 1.2, 1.6, 1.7]);
        let svg = overlay_svg(&[("θ = 0°".to_string(), &c)], "R_b", 0.1);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains(r#"version="1.1""#));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("θ = 0°"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn summary_schema() {
        let rows = vec![SummaryRow::failed(20.0, "no sign change")];
        let v: serde_json::Value = serde_json::from_str(&summary_json(&rows)).unwrap();
        let keys: Vec<&str> = v[0].as_object().unwrap().keys().map(|s| s.as_str()).collect();
        for key in ["theta_i", "k_c", "R_c", "lambda_c", "branch", "mode", "status"] {
            assert!(keys.contains(&key), "{key}");
        }
        assert_eq!(keys.len(), 7);
    }
}
