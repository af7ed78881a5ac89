//! Neutral curves `Re σ(k, R) = 0` and their minima.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basic_state::{solve_basic_state, BasicStateError};
use crate::numerics::{brent, RootError};
use crate::params::{ParamError, SuspensionParams};
use crate::phototaxis::TaxisFunction;
use crate::stability::{
    classify, growth_rate, spectrum_on, spectrum_oracle, Branch, Coefficients, GrowthResult, Seed, StabilityError,
    StabilityProblem, CLASSIFY_TOL,
};

/// Which Rayleigh number is solved for; the other one stays fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParameter {
    RayleighBio,
    RayleighThermal,
}

impl SweptParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweptParameter::RayleighBio => "rb",
            SweptParameter::RayleighThermal => "rt",
        }
    }
}

impl FromStr for SweptParameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rb" | "r_b" | "rayleigh_bio" => Ok(SweptParameter::RayleighBio),
            "rt" | "r_t" | "rayleigh_thermal" => Ok(SweptParameter::RayleighThermal),
            other => Err(format!("unknown swept parameter '{other}' (expected rb or rt)")),
        }
    }
}

impl std::fmt::Display for SweptParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Error)]
pub enum NeutralError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Basic(#[from] BasicStateError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error("no sign change of Re(sigma) at k = {k} for R in [{lo}, {hi}]")]
    NoSignChange { k: f64, lo: f64, hi: f64 },
    #[error("root finder failed at k = {k}: {reason}")]
    RootFailed { k: f64, reason: String },
    #[error("neutral point at k = {k} misses tolerance: |Re(sigma)| = {growth:.3e}")]
    Tolerance { k: f64, growth: f64 },
    #[error("need at least three valid points, have {0}")]
    TooFewPoints(usize),
    #[error("minimum not bracketed; widen k range")]
    MinimumNotBracketed,
    #[error("eigenfunction is identically zero")]
    DegenerateEigenfunction,
    #[error("invalid k range: {0}")]
    BadRange(String),
}

#[derive(Debug, Clone)]
pub struct NeutralOptions {
    /// Initial bracket on the swept Rayleigh number; expanded as needed.
    pub bracket: (f64, f64),
    pub max_expansions: usize,
    /// Required `|Re σ|` at a stored point.
    pub growth_tol: f64,
    /// Vertical mode of the sinusoidal seed; 1 traces the lowest branch.
    pub mode: usize,
    /// Refine around the discrete minimum with steps of `step/5` then `step/25`.
    pub refine: bool,
}

impl Default for NeutralOptions {
    fn default() -> Self {
        NeutralOptions { bracket: (1.0, 2000.0), max_expansions: 12, growth_tol: 1e-8, mode: 1, refine: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeutralPoint {
    pub k: f64,
    pub r: f64,
    pub im_sigma: f64,
    pub branch: Branch,
    pub mode: usize,
}

/// A wavenumber where no neutral point was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub k: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct NeutralCurve {
    /// Sorted by `k`.
    pub points: Vec<NeutralPoint>,
    pub gaps: Vec<Gap>,
    pub swept: SweptParameter,
    /// Value of the Rayleigh number that is not swept.
    pub fixed_value: f64,
    pub params: SuspensionParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub k_c: f64,
    pub r_c: f64,
    pub lambda_c: f64,
    pub branch: Branch,
    pub mode: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bifurcation {
    pub k_b: f64,
    /// The transition lies in `(k_prev, k_b]` between two traced points.
    pub bracketed: bool,
}

/// Basic state and coefficient profiles for one parameter set, reused for
/// every `(k, R)` evaluation.
#[derive(Debug, Clone)]
pub struct NeutralSolver {
    template: StabilityProblem,
    /// Profiles for the 40-cell dense spectrum used as a leading-mode guard.
    coarse: Arc<Coefficients>,
    pub swept: SweptParameter,
    pub fixed_value: f64,
    pub options: NeutralOptions,
}

impl NeutralSolver {
    pub fn new(params: &SuspensionParams, swept: SweptParameter, options: NeutralOptions) -> Result<Self, NeutralError> {
        let params = params.clone().validate()?;
        let taxis = TaxisFunction::from_params(&params);
        let basic = solve_basic_state(&params, &taxis)?;
        let coefficients = Arc::new(Coefficients::from_basic(&basic)?);
        let coarse = Arc::new(Coefficients::on_state(&basic.resample(81)?)?);
        let top = params.top_boundary;
        let template = StabilityProblem::new(Arc::new(basic), coefficients, 1.0, 0.0, 0.0, top)?;
        let fixed_value = match swept {
            SweptParameter::RayleighBio => params.rayleigh_thermal,
            SweptParameter::RayleighThermal => params.rayleigh_bio,
        };
        Ok(NeutralSolver { template, coarse, swept, fixed_value, options })
    }

    pub fn params(&self) -> &SuspensionParams {
        &self.template.basic.params
    }

    pub fn problem(&self, k: f64, r: f64) -> Result<StabilityProblem, StabilityError> {
        match self.swept {
            SweptParameter::RayleighBio => self.template.with(k, r, self.fixed_value),
            SweptParameter::RayleighThermal => self.template.with(k, self.fixed_value, r),
        }
    }

    /// Growth rate of the leading mode at `(k, R)`.
    ///
    /// Newton is warm-started from `seed`. A coarse dense spectrum then checks
    /// that no other mode lies clearly to the right; if one does, the solve is
    /// reseeded there. Of the converged candidates the rightmost is kept.
    pub fn leading(&self, k: f64, r: f64, seed: Option<&GrowthResult>) -> Result<GrowthResult, StabilityError> {
        let problem = self.problem(k, r)?;
        let mode = self.options.mode;
        let mut best: Option<GrowthResult> = None;
        let mut failure = None;
        let mut attempt = |s: Seed<'_>, best: &mut Option<GrowthResult>| match growth_rate(&problem, s) {
            Ok(res) => {
                if best.as_ref().is_none_or(|b| res.sigma.re > b.sigma.re) {
                    *best = Some(res);
                }
            }
            Err(e) => failure = Some(e),
        };
        if let Some(prev) = seed {
            attempt(Seed::Previous(prev), &mut best);
            if best.is_none() {
                attempt(Seed::Sinusoidal { sigma: prev.sigma, mode }, &mut best);
            }
        }
        if mode == 1 {
            let coarse = spectrum_on(&problem, &self.coarse)[0];
            if best.as_ref().is_none_or(|b| coarse.re > b.sigma.re + 0.05 * coarse.norm().max(1.0)) {
                attempt(Seed::Sinusoidal { sigma: coarse, mode: 1 }, &mut best);
            }
        }
        if best.is_none() {
            attempt(Seed::Sinusoidal { sigma: Complex64::new(0.0, 0.0), mode }, &mut best);
        }
        best.ok_or_else(|| failure.expect("at least one attempt was made"))
    }

    /// Neutral value of the swept Rayleigh number at wavenumber `k`.
    pub fn neutral_point(
        &self,
        k: f64,
        bracket: (f64, f64),
        seed: Option<&GrowthResult>,
    ) -> Result<(f64, GrowthResult), NeutralError> {
        let (r, res) = self.solve_root(k, bracket, seed)?;
        // Confirm on the problem's own mesh that nothing else is unstable.
        let problem = self.problem(k, r)?;
        if self.options.mode == 1 {
            // The dense spectrum is only second order, so the neutral mode
            // itself may sit slightly off zero there; look for a different
            // mode that is clearly growing.
            let lead = spectrum_oracle(&problem)[0];
            let scale = lead.norm().max(1.0);
            if lead.re > 0.05 * scale && (lead - res.sigma).norm() > 0.05 * scale {
                let reseeded = growth_rate(&problem, Seed::Sinusoidal { sigma: lead, mode: 1 })?;
                let width = (bracket.1 - bracket.0).abs().max(1.0);
                return self.solve_root(k, (r - width, r), Some(&reseeded));
            }
        }
        Ok((r, res))
    }

    fn solve_root(
        &self,
        k: f64,
        bracket: (f64, f64),
        seed: Option<&GrowthResult>,
    ) -> Result<(f64, GrowthResult), NeutralError> {
        let (mut lo, mut hi) = if bracket.0 <= bracket.1 { bracket } else { (bracket.1, bracket.0) };
        let mut last = match seed {
            Some(s) => s.clone(),
            None => self.leading(k, lo, None)?,
        };
        let eval = |r: f64, last: &mut GrowthResult| -> Result<f64, StabilityError> {
            let res = self.leading(k, r, Some(last))?;
            let g = res.sigma.re;
            *last = res;
            Ok(g)
        };
        let mut f_lo = eval(lo, &mut last)?;
        let mut f_hi = eval(hi, &mut last)?;
        let mut expansions = 0;
        while f_lo.signum() == f_hi.signum() && f_lo != 0.0 && f_hi != 0.0 {
            if expansions == self.options.max_expansions {
                return Err(NeutralError::NoSignChange { k, lo, hi });
            }
            expansions += 1;
            let span = hi - lo;
            if f_lo > 0.0 {
                hi = lo;
                f_hi = f_lo;
                lo -= 2.0 * span;
                f_lo = eval(lo, &mut last)?;
            } else {
                lo = hi;
                f_lo = f_hi;
                hi += 2.0 * span;
                f_hi = eval(hi, &mut last)?;
            }
        }
        let ftol = 0.1 * self.options.growth_tol;
        let xtol = 1e-14 * lo.abs().max(hi.abs()).max(1.0);
        let root = brent(|r| eval(r, &mut last), lo, hi, f_lo, f_hi, xtol, ftol, 200).map_err(|e| match e {
            RootError::Eval(err) => NeutralError::Stability(err),
            other => NeutralError::RootFailed { k, reason: other.to_string() },
        })?;
        let res = self.leading(k, root, Some(&last))?;
        if res.sigma.re.abs() > self.options.growth_tol {
            return Err(NeutralError::Tolerance { k, growth: res.sigma.re.abs() });
        }
        Ok((root, res))
    }

    /// Traces the curve over `k_range` (either order; descending sweeps
    /// continue from the upper end) with spacing `k_step`.
    pub fn trace(&self, k_range: (f64, f64), k_step: f64) -> Result<NeutralCurve, NeutralError> {
        let (a, b) = k_range;
        if !(k_step > 0.0) || !a.is_finite() || !b.is_finite() || a.min(b) <= 0.0 {
            return Err(NeutralError::BadRange(format!("[{a}, {b}] step {k_step}")));
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let count = ((hi - lo) / k_step + 1e-9).floor() as usize;
        let mut ks: Vec<f64> = (0..=count).map(|i| lo + i as f64 * k_step).collect();
        if hi - ks[ks.len() - 1] > 1e-9 * hi {
            ks.push(hi);
        }
        if a > b {
            ks.reverse();
        }
        let mut curve = NeutralCurve {
            points: Vec::new(),
            gaps: Vec::new(),
            swept: self.swept,
            fixed_value: self.fixed_value,
            params: self.params().clone(),
        };
        let mut chain = Continuation::default();
        for &k in &ks {
            self.step(&mut curve, &mut chain, k);
        }
        if self.options.refine {
            for div in [5.0, 25.0] {
                let Some(i) = discrete_minimum(&curve.points) else { break };
                if i == 0 || i + 1 == curve.points.len() {
                    break;
                }
                let (kl, kr) = (curve.points[i - 1].k, curve.points[i + 1].k);
                let h = k_step / div;
                let mut chain = Continuation::at(self, &curve.points[i]);
                let centre = curve.points[i].k;
                let mut k = centre + h;
                while k < kr - 1e-9 * h {
                    self.step(&mut curve, &mut chain, k);
                    k += h;
                }
                let mut chain = Continuation::at(self, &curve.points[i]);
                let mut k = centre - h;
                while k > kl + 1e-9 * h {
                    self.step(&mut curve, &mut chain, k);
                    k -= h;
                }
                sort_points(&mut curve);
            }
        }
        sort_points(&mut curve);
        Ok(curve)
    }

    fn step(&self, curve: &mut NeutralCurve, chain: &mut Continuation, k: f64) {
        let bracket = match chain.r {
            Some(r) => {
                let w = 0.1 * r.abs().max(10.0);
                (r - w, r + w)
            }
            None => self.options.bracket,
        };
        match self.neutral_point(k, bracket, chain.result.as_ref()) {
            Ok((r, res)) => match to_point(k, r, &res) {
                Ok(p) => {
                    curve.points.push(p);
                    chain.r = Some(r);
                    chain.result = Some(res);
                }
                Err(e) => curve.gaps.push(Gap { k, reason: e.to_string() }),
            },
            Err(e) => curve.gaps.push(Gap { k, reason: e.to_string() }),
        }
    }

    /// `Re σ` at a curve point re-solved from a fresh sinusoidal seed.
    pub fn verify_point(&self, point: &NeutralPoint) -> Result<f64, NeutralError> {
        Ok(self.leading(point.k, point.r, None)?.sigma.re)
    }
}

#[derive(Default)]
struct Continuation {
    r: Option<f64>,
    result: Option<GrowthResult>,
}

impl Continuation {
    fn at(solver: &NeutralSolver, p: &NeutralPoint) -> Self {
        Continuation { r: Some(p.r), result: solver.leading(p.k, p.r, None).ok() }
    }
}

fn to_point(k: f64, r: f64, res: &GrowthResult) -> Result<NeutralPoint, NeutralError> {
    Ok(NeutralPoint {
        k,
        r,
        im_sigma: res.sigma.im,
        branch: classify(res, CLASSIFY_TOL)?,
        mode: mode_number(&res.w)?,
    })
}

fn sort_points(curve: &mut NeutralCurve) {
    curve.points.sort_by(|a, b| a.k.total_cmp(&b.k));
    curve.points.dedup_by(|a, b| (a.k - b.k).abs() <= 1e-12 * a.k.abs().max(1.0));
    curve.gaps.sort_by(|a, b| a.k.total_cmp(&b.k));
}

/// Index of the smallest `R`, earliest on ties.
fn discrete_minimum(points: &[NeutralPoint]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        if best.is_none_or(|b| p.r < points[b].r) {
            best = Some(i);
        }
    }
    best
}

/// Builds a solver for `params` and traces one curve.
pub fn trace(
    params: &SuspensionParams,
    k_range: (f64, f64),
    k_step: f64,
    which: SweptParameter,
) -> Result<NeutralCurve, NeutralError> {
    NeutralSolver::new(params, which, NeutralOptions::default())?.trace(k_range, k_step)
}

/// Single neutral point with a fresh basic state.
pub fn neutral_point(
    k: f64,
    params: &SuspensionParams,
    which: SweptParameter,
    bracket: (f64, f64),
) -> Result<(f64, GrowthResult), NeutralError> {
    NeutralSolver::new(params, which, NeutralOptions::default())?.neutral_point(k, bracket, None)
}

/// Minimum of the curve, refined by a parabola through the discrete
/// minimizer and its two neighbours.
pub fn critical_point(curve: &NeutralCurve) -> Result<CriticalPoint, NeutralError> {
    let pts = &curve.points;
    if pts.len() < 3 {
        return Err(NeutralError::TooFewPoints(pts.len()));
    }
    let i = discrete_minimum(pts).unwrap();
    if i == 0 || i + 1 == pts.len() {
        return Err(NeutralError::MinimumNotBracketed);
    }
    let (x0, x1, x2) = (pts[i - 1].k, pts[i].k, pts[i + 1].k);
    let (y0, y1, y2) = (pts[i - 1].r, pts[i].r, pts[i + 1].r);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    let (k_c, r_c) = if curvature > 0.0 {
        let k = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
        let k = k.clamp(x0, x2);
        (k, y1 + d01 * (k - x1) + curvature * (k - x0) * (k - x1))
    } else {
        (x1, y1)
    };
    let r_c = r_c.min(y1);
    Ok(CriticalPoint { k_c, r_c, lambda_c: 2.0 * PI / k_c, branch: pts[i].branch, mode: pts[i].mode })
}

/// Vertical cell count: sign changes of `Re W` inside the layer plus one,
/// after rotating the phase so the largest `|W|` is real and positive.
pub fn mode_number(w: &[Complex64]) -> Result<usize, NeutralError> {
    let wmax = w
        .iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .ok_or(NeutralError::DegenerateEigenfunction)?;
    let scale = wmax.norm();
    if !(scale > 0.0) {
        return Err(NeutralError::DegenerateEigenfunction);
    }
    let rot = wmax.conj() / scale;
    let floor = 1e-8 * scale;
    let mut changes = 0;
    let mut prev = 0.0f64;
    for v in &w[1..w.len().saturating_sub(1)] {
        let x = (v * rot).re;
        if x.abs() <= floor {
            continue;
        }
        if prev != 0.0 && x.signum() != prev.signum() {
            changes += 1;
        }
        prev = x;
    }
    Ok(changes + 1)
}

/// Smallest `k` where the branch label turns from oscillatory to
/// stationary in an ascending scan.
pub fn oscillatory_bifurcation(curve: &NeutralCurve) -> Option<Bifurcation> {
    curve
        .points
        .windows(2)
        .find(|w| w[0].branch == Branch::Oscillatory && w[1].branch == Branch::Stationary)
        .map(|w| Bifurcation { k_b: w[1].k, bracketed: true })
}
