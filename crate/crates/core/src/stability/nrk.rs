//! Newton–Raphson–Kantorovich solution of the eigenproblem.
//!
//! The ninth-order system is augmented with `dσ/dz = 0` and a normalization
//! condition, discretized by three-stage Gauss–Legendre collocation (sixth
//! order at the nodes) and solved by damped Newton iteration on the
//! resulting banded system. The stage values are eliminated interval by
//! interval, which leaves `y_{i+1} = Φ_i(σ) y_i` as the collocation rows.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::system::{self, Groups, Mat9, Vec9, C, NV, ONE, ZERO};
use super::system::{D2PHI, D2W, D3W, DPHI, DT, DW, PHI, T, W};
use super::{spectrum, GrowthResult, StabilityError, StabilityProblem};
use crate::numerics::BandedMatrix;
use crate::params::Boundary;

/// Condition that fixes the amplitude of the eigenfunction at `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `D²W(0) = 1` on a rigid bottom, `DW(0) = 1` on a stress-free one.
    WallShear,
    /// `DT(0) = 1`, for modes with no motion.
    TemperatureSlope,
}

impl Normalization {
    fn component(self, bottom: Boundary) -> usize {
        match (self, bottom) {
            (Normalization::WallShear, Boundary::Rigid) => D2W,
            (Normalization::WallShear, Boundary::StressFree) => DW,
            (Normalization::TemperatureSlope, _) => DT,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NrkOptions {
    /// Stop when the max-norm residual is at or below this.
    pub tol: f64,
    pub max_iterations: usize,
    pub normalization: Normalization,
    /// Fixed-σ inverse-iteration sweeps applied to the seed before Newton.
    /// `None` picks 3 for fresh seeds and 0 for warm starts.
    pub inverse_iterations: Option<usize>,
}

impl Default for NrkOptions {
    fn default() -> Self {
        NrkOptions { tol: 1e-10, max_iterations: 50, normalization: Normalization::WallShear, inverse_iterations: None }
    }
}

/// Starting point for the Newton iteration.
#[derive(Debug, Clone, Copy)]
pub enum Seed<'a> {
    /// `W ∝ sin²(mπz)`, `Φ ∝ (1-z) sin(mπz)`, `T ∝ sin(mπz)` with a guess for σ.
    Sinusoidal { sigma: Complex64, mode: usize },
    /// Eigenfunction and σ of a nearby problem.
    Previous(&'a GrowthResult),
    /// Sinusoidal shape with σ from the rightmost eigenvalue of a coarse
    /// dense discretization.
    Rightmost,
}

impl Default for Seed<'_> {
    fn default() -> Self {
        Seed::Sinusoidal { sigma: Complex64::new(0.0, 0.0), mode: 1 }
    }
}

pub fn growth_rate(problem: &StabilityProblem, seed: Seed<'_>) -> Result<GrowthResult, StabilityError> {
    growth_rate_with(problem, seed, &NrkOptions::default())
}

pub fn growth_rate_with(
    problem: &StabilityProblem,
    seed: Seed<'_>,
    options: &NrkOptions,
) -> Result<GrowthResult, StabilityError> {
    let z = problem.z();
    let norm = options.normalization.component(problem.bottom);
    let (mut y, mut sigma, default_sweeps) = match seed {
        Seed::Sinusoidal { sigma, mode } => (sinusoid(z, mode.max(1)), sigma, 3),
        Seed::Previous(prev) => {
            let y = if prev.z.len() == z.len() { prev.state.clone() } else { interpolate(&prev.z, &prev.state, z) };
            (y, prev.sigma, if prev.z.len() == z.len() { 0 } else { 1 })
        }
        Seed::Rightmost => {
            let cells = ((z.len() - 1) / 2).clamp(20, 60);
            let s = spectrum::rightmost(problem, cells)?;
            (sinusoid(z, 1), s, 3)
        }
    };
    let sweeps = options.inverse_iterations.unwrap_or(default_sweeps);
    if sweeps > 0 {
        let (ys, s) = inverse_iteration(problem, &y, sigma, norm, sweeps)?;
        y = ys;
        sigma = s;
    } else if y[0][norm].norm() > 0.0 {
        let scale = ONE / y[0][norm];
        y.iter_mut().for_each(|v| v.iter_mut().for_each(|c| *c *= scale));
    }

    let ctx = Context::new(problem, norm);
    let mut transfers = ctx.transfers(sigma, true);
    let mut r = ctx.residual(&y, &transfers);
    let mut rn = max_norm(&r);
    let mut history = Vec::new();
    let mut iterations = 0;
    // The σ estimate from inverse iteration is only first order in the
    // seed error, so a small residual alone does not end the iteration.
    let min_iterations = usize::from(sweeps > 0);
    loop {
        history.push(rn);
        if rn <= options.tol && iterations >= min_iterations {
            break;
        }
        if iterations == options.max_iterations || !rn.is_finite() {
            return Err(StabilityError::NotConverged { iterations, residual: rn, history });
        }
        iterations += 1;
        let jac = ctx.linearize(&y, &transfers);
        let lu = jac.factor().map_err(|e| StabilityError::SingularJacobian { pivot: e.pivot })?;
        let step = lu.solve(&r.iter().map(|v| -v).collect::<Vec<_>>());
        let mut lambda = 1.0;
        loop {
            let trial: Vec<Vec9> = y
                .iter()
                .enumerate()
                .map(|(i, yi)| std::array::from_fn(|c| yi[c] + lambda * step[10 * i + c]))
                .collect();
            let trial_sigma = sigma + lambda * step[9];
            let tt = ctx.transfers(trial_sigma, true);
            let rt = ctx.residual(&trial, &tt);
            let rtn = max_norm(&rt);
            if (rtn.is_finite() && rtn <= (1.0 - 1e-4 * lambda) * rn) || lambda < 1e-3 {
                y = trial;
                transfers = tt;
                sigma = trial_sigma;
                r = rt;
                rn = rtn;
                break;
            }
            lambda *= 0.5;
        }
    }

    Ok(GrowthResult {
        sigma,
        z: z.to_vec(),
        w: y.iter().map(|v| v[W]).collect(),
        phi: y.iter().map(|v| v[PHI]).collect(),
        theta: y.iter().map(|v| -v[DPHI]).collect(),
        t: y.iter().map(|v| v[T]).collect(),
        converged: true,
        iterations,
        residual: rn,
        residual_history: history,
        normalization: options.normalization,
        state: y,
    })
}

fn max_norm(r: &[C]) -> f64 {
    r.iter().map(|v| v.norm()).fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}

fn sinusoid(z: &[f64], mode: usize) -> Vec<Vec9> {
    let p = mode as f64 * PI;
    let (cp, ct) = (0.1, 0.1);
    z.iter()
        .map(|&z| {
            let (s, c) = (p * z).sin_cos();
            let (s2, c2) = (2.0 * p * z).sin_cos();
            let mut y = [ZERO; NV];
            y[W] = C::from(s * s / (2.0 * p * p));
            y[DW] = C::from(s2 / (2.0 * p));
            y[D2W] = C::from(c2);
            y[D3W] = C::from(-2.0 * p * s2);
            y[PHI] = C::from(cp * (1.0 - z) * s);
            y[DPHI] = C::from(cp * (-s + (1.0 - z) * p * c));
            y[D2PHI] = C::from(cp * (-2.0 * p * c - (1.0 - z) * p * p * s));
            y[T] = C::from(ct * s);
            y[DT] = C::from(ct * p * c);
            y
        })
        .collect()
}

fn interpolate(from_z: &[f64], from: &[Vec9], to_z: &[f64]) -> Vec<Vec9> {
    to_z.iter()
        .map(|&z| {
            let j = from_z.partition_point(|&x| x <= z).clamp(1, from_z.len() - 1);
            let t = (z - from_z[j - 1]) / (from_z[j] - from_z[j - 1]);
            std::array::from_fn(|c| from[j - 1][c] * (1.0 - t) + from[j][c] * t)
        })
        .collect()
}

/// Linear wall conditions as `(coefficients, right-hand side)`; the bottom
/// list ends with the normalization row.
fn wall_conditions(problem: &StabilityProblem, norm: usize) -> (Vec<(Vec9, C)>, Vec<(Vec9, C)>) {
    let coef = &problem.coefficients;
    let last = coef.z.len() - 1;
    let row = |entries: &[(usize, f64)], rhs: f64| {
        let mut c = [ZERO; NV];
        for &(j, v) in entries {
            c[j] = C::from(v);
        }
        (c, C::from(rhs))
    };
    let tangential = |b: Boundary| if b == Boundary::Rigid { DW } else { D2W };
    let bottom = vec![
        row(&[(W, 1.0)], 0.0),
        row(&[(tangential(problem.bottom), 1.0)], 0.0),
        row(&[(D2PHI, 1.0), (DPHI, -coef.aleph2[0]), (PHI, -0.5 * coef.aleph1[0])], 0.0),
        row(&[(T, 1.0)], 0.0),
        row(&[(norm, 1.0)], 1.0),
    ];
    let top = vec![
        row(&[(W, 1.0)], 0.0),
        row(&[(tangential(problem.top), 1.0)], 0.0),
        row(&[(D2PHI, 1.0), (DPHI, -coef.aleph2[last])], 0.0),
        row(&[(PHI, 1.0)], 0.0),
        row(&[(T, 1.0)], 0.0),
    ];
    (bottom, top)
}

fn apply(row: &(Vec9, C), y: &Vec9) -> C {
    row.0.iter().zip(y).map(|(a, b)| a * b).sum::<C>() - row.1
}

/// Wall-condition residuals of a state, bottom then top.
pub(crate) fn boundary_rows(problem: &StabilityProblem, normalization: Normalization, y: &[Vec9]) -> Vec<C> {
    let (bottom, top) = wall_conditions(problem, normalization.component(problem.bottom));
    let last = y.len() - 1;
    bottom.iter().map(|r| apply(r, &y[0])).chain(top.iter().map(|r| apply(r, &y[last]))).collect()
}

const SQRT15: f64 = 3.872_983_346_207_417;

/// Gauss–Legendre nodes on `[0, 1]`.
pub(crate) const GAUSS_C: [f64; 3] = [0.5 - SQRT15 / 10.0, 0.5, 0.5 + SQRT15 / 10.0];
const GAUSS_B: [f64; 3] = [5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0];
const GAUSS_A: [[f64; 3]; 3] = [
    [5.0 / 36.0, 2.0 / 9.0 - SQRT15 / 15.0, 5.0 / 36.0 - SQRT15 / 30.0],
    [5.0 / 36.0 + SQRT15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - SQRT15 / 24.0],
    [5.0 / 36.0 + SQRT15 / 30.0, 2.0 / 9.0 + SQRT15 / 15.0, 5.0 / 36.0],
];

/// Number of stage unknowns in one interval.
const NS: usize = 3 * NV;

/// Components whose derivative depends on height or σ; the others are plain
/// derivatives of their neighbours.
const TOP: [usize; 3] = [D3W, D2PHI, DT];

/// Number of unknowns left after eliminating the plain-derivative stages.
const NK: usize = 3 * TOP.len();

/// LU factors of a small dense matrix with partial pivoting.
struct SmallLu {
    lu: [[C; NK]; NK],
    pivots: [usize; NK],
}

impl SmallLu {
    fn factor(mut lu: [[C; NK]; NK]) -> Option<Self> {
        let mut pivots = [0; NK];
        for k in 0..NK {
            let p = (k..NK).max_by(|&x, &y| lu[x][k].l1_norm().total_cmp(&lu[y][k].l1_norm())).unwrap();
            if lu[p][k] == ZERO || !lu[p][k].is_finite() {
                return None;
            }
            lu.swap(k, p);
            pivots[k] = p;
            let inv = ONE / lu[k][k];
            let pivot_row = lu[k];
            for row in lu.iter_mut().skip(k + 1) {
                let l = row[k] * inv;
                row[k] = l;
                for c in k + 1..NK {
                    row[c] -= l * pivot_row[c];
                }
            }
        }
        Some(SmallLu { lu, pivots })
    }

    /// Overwrites the nine right-hand sides in `b` with the solutions.
    fn solve(&self, b: &mut [[C; NV]; NK]) {
        for k in 0..NK {
            b.swap(k, self.pivots[k]);
        }
        for k in 0..NK {
            let bk = b[k];
            for r in k + 1..NK {
                let l = self.lu[r][k];
                for q in 0..NV {
                    b[r][q] -= l * bk[q];
                }
            }
        }
        for k in (0..NK).rev() {
            let inv = ONE / self.lu[k][k];
            for q in 0..NV {
                b[k][q] *= inv;
            }
            let bk = b[k];
            for r in 0..k {
                let u = self.lu[r][k];
                for q in 0..NV {
                    b[r][q] -= u * bk[q];
                }
            }
        }
    }
}

/// Plain-derivative rows `(p, s)` with `f_p = y_s`.
const PLAIN: [(usize, usize); 6] = [(W, DW), (DW, D2W), (D2W, D3W), (PHI, DPHI), (DPHI, D2PHI), (T, DT)];

/// `x + q z` for stage blocks.
fn add_mul(x: &[[C; NV]; NS], q: &[[C; NV]; NS], zk: &[[C; NV]; NK]) -> [[C; NV]; NS] {
    let mut out = *x;
    for (o, qr) in out.iter_mut().zip(q) {
        for (m, zr) in zk.iter().enumerate() {
            let v = qr[m];
            if v != ZERO {
                for c in 0..NV {
                    o[c] += v * zr[c];
                }
            }
        }
    }
    out
}

/// `a` times the rows of stage `j` in `x`, skipping the zero entries of `a`.
fn block_mul(a: &Mat9, x: &[[C; NV]; NS], j: usize) -> Mat9 {
    let mut out = [[ZERO; NV]; NV];
    for (p, row) in a.iter().enumerate() {
        for (s, &v) in row.iter().enumerate() {
            if v != ZERO {
                let xs = &x[NV * j + s];
                for q in 0..NV {
                    out[p][q] += v * xs[q];
                }
            }
        }
    }
    out
}

fn matvec(a: &Mat9, v: &Vec9) -> Vec9 {
    std::array::from_fn(|i| a[i].iter().zip(v).map(|(x, y)| x * y).sum())
}

/// Transfer matrix of one interval and its σ-derivative. The collocation
/// rows are `y_r - Φ y_l`, with derivative `-Φ` in the left state, the
/// identity in the right state and `-(dΦ/dσ) y_l` in σ.
struct Transfer {
    phi: Mat9,
    dphi: Mat9,
}

/// `P⁻¹ E` and `P⁻¹ U` for one interval width; see `Context::transfer`.
struct PlainBasis {
    h: f64,
    x0: [[C; NV]; NS],
    q: [[C; NV]; NS],
}

/// `P⁻¹ b = Σ_{m<4} (h a⊗N)^m b` with `N` the plain-derivative rows.
fn plain_inverse(h: f64, b: &[[C; NV]; NS]) -> [[C; NV]; NS] {
    let mut out = *b;
    let mut term = *b;
    for _ in 1..4 {
        let mut next = [[ZERO; NV]; NS];
        for j in 0..3 {
            for l in 0..3 {
                let c = h * GAUSS_A[j][l];
                for &(p, s) in &PLAIN {
                    for col in 0..NV {
                        next[NV * j + p][col] += c * term[NV * l + s][col];
                    }
                }
            }
        }
        for (o, n) in out.iter_mut().zip(&next) {
            for col in 0..NV {
                o[col] += n[col];
            }
        }
        term = next;
    }
    out
}

impl PlainBasis {
    fn new(h: f64) -> Self {
        let mut e = [[ZERO; NV]; NS];
        for (r, row) in e.iter_mut().enumerate() {
            row[r % NV] = ONE;
        }
        let mut u = [[ZERO; NV]; NS];
        for j in 0..3 {
            for l in 0..3 {
                for (t, &p) in TOP.iter().enumerate() {
                    u[NV * j + p][3 * l + t] = C::from(h * GAUSS_A[j][l]);
                }
            }
        }
        PlainBasis { h, x0: plain_inverse(h, &e), q: plain_inverse(h, &u) }
    }
}

struct Context<'a> {
    problem: &'a StabilityProblem,
    groups: Groups,
    bottom: Vec<(Vec9, C)>,
    top: Vec<(Vec9, C)>,
    /// One entry per distinct interval width.
    bases: Vec<PlainBasis>,
}

impl<'a> Context<'a> {
    fn new(problem: &'a StabilityProblem, norm: usize) -> Self {
        assert!(
            problem.coefficients.stages.len() == 3 * (problem.z().len() - 1),
            "collocation needs profiles built with Coefficients::from_basic"
        );
        let (bottom, top) = wall_conditions(problem, norm);
        let mut bases: Vec<PlainBasis> = Vec::new();
        for w in problem.z().windows(2) {
            let h = w[1] - w[0];
            if !bases.iter().any(|b| b.h == h) {
                bases.push(PlainBasis::new(h));
            }
        }
        Context { problem, groups: problem.groups(), bottom, top, bases }
    }

    /// Solves the stage equations `Y_j = y_l + h Σ a_jl f(Y_l)` for a unit
    /// left state and sums the stages into `Φ`. A singular stage system
    /// gives a NaN transfer.
    ///
    /// The stage matrix is `P - U V`: `P = I - h a⊗N` carries the
    /// plain-derivative rows `N` and is inverted by a finite series since
    /// `N⁴ = 0`, while `U V` holds the three rows listed in `TOP` and has rank
    /// nine. The Woodbury identity then needs only a 9×9 factorization.
    fn transfer(&self, i: usize, sigma: C, derivative: bool) -> Transfer {
        let g = &self.groups;
        let z = self.problem.z();
        let h = z[i + 1] - z[i];
        let stages = &self.problem.coefficients.stages[3 * i..3 * i + 3];
        let a: [Mat9; 3] = std::array::from_fn(|j| system::jacobian(g, &stages[j], sigma));
        let nan = Transfer { phi: [[C::new(f64::NAN, 0.0); NV]; NV], dphi: [[ZERO; NV]; NV] };

        let PlainBasis { x0, q, .. } = self.bases.iter().find(|b| b.h == h).unwrap();

        // Rows of V, or of its σ-derivative, applied to a stage block.
        let v_mul = |mats: &[Mat9; 3], x: &[[C; NV]; NS]| {
            let mut out = [[ZERO; NV]; NK];
            for l in 0..3 {
                for (t, &p) in TOP.iter().enumerate() {
                    for (s, &v) in mats[l][p].iter().enumerate() {
                        if v != ZERO {
                            for c in 0..NV {
                                out[3 * l + t][c] += v * x[NV * l + s][c];
                            }
                        }
                    }
                }
            }
            out
        };
        let vq = v_mul(&a, q);
        let mut k = [[ZERO; NK]; NK];
        for r in 0..NK {
            for c in 0..NK {
                k[r][c] = -vq[r][c];
            }
            k[r][r] += ONE;
        }
        let Some(lu) = SmallLu::factor(k) else { return nan };
        let mut zk = v_mul(&a, x0);
        lu.solve(&mut zk);
        let y = add_mul(x0, q, &zk);

        let ay: [Mat9; 3] = std::array::from_fn(|j| block_mul(&a[j], &y, j));
        let mut phi = [[ZERO; NV]; NV];
        for p in 0..NV {
            for c in 0..NV {
                phi[p][c] = h * (0..3).map(|j| GAUSS_B[j] * ay[j][p][c]).sum::<C>();
            }
            phi[p][p] += ONE;
        }
        let mut dphi = [[ZERO; NV]; NV];
        if derivative {
            // ∂f/∂σ is linear in the state, the same at every height and
            // confined to the rows in TOP, so dY = M⁻¹ U (V_σ Y) = Q K⁻¹ V_σ Y.
            let mut ds = [[ZERO; NV]; NV];
            for c in 0..NV {
                let mut unit = [ZERO; NV];
                unit[c] = ONE;
                let col = system::sigma_derivative(g, &unit);
                for p in 0..NV {
                    ds[p][c] = col[p];
                }
            }
            let ds3 = [ds; 3];
            let mut w = v_mul(&ds3, &y);
            lu.solve(&mut w);
            let dy = add_mul(&[[ZERO; NV]; NS], q, &w);
            let sy: [Mat9; 3] = std::array::from_fn(|j| block_mul(&ds, &y, j));
            let ady: [Mat9; 3] = std::array::from_fn(|j| block_mul(&a[j], &dy, j));
            for p in 0..NV {
                for c in 0..NV {
                    dphi[p][c] = h * (0..3).map(|j| GAUSS_B[j] * (sy[j][p][c] + ady[j][p][c])).sum::<C>();
                }
            }
        }
        Transfer { phi, dphi }
    }

    fn transfers(&self, sigma: C, derivative: bool) -> Vec<Transfer> {
        (0..self.problem.z().len() - 1).map(|i| self.transfer(i, sigma, derivative)).collect()
    }

    /// Residual in the row order of the augmented Jacobian.
    fn residual(&self, y: &[Vec9], transfers: &[Transfer]) -> Vec<C> {
        let n = y.len();
        let mut out = Vec::with_capacity(10 * n);
        out.extend(self.bottom.iter().map(|r| apply(r, &y[0])));
        for (i, t) in transfers.iter().enumerate() {
            let pl = matvec(&t.phi, &y[i]);
            out.extend((0..NV).map(|c| y[i + 1][c] - pl[c]));
            out.push(ZERO);
        }
        out.extend(self.top.iter().map(|r| apply(r, &y[n - 1])));
        out
    }

    /// Jacobian of the augmented system (state plus σ at each node, ten
    /// unknowns per node).
    fn linearize(&self, y: &[Vec9], transfers: &[Transfer]) -> BandedMatrix {
        let n = y.len();
        let mut jac = BandedMatrix::zeros(10 * n, 14, 14);
        let col = |i: usize, c: usize| 10 * i + c;
        for (r, cond) in self.bottom.iter().enumerate() {
            for c in 0..NV {
                if cond.0[c] != ZERO {
                    jac.set(r, col(0, c), cond.0[c]);
                }
            }
        }
        for (i, t) in transfers.iter().enumerate() {
            let ds = matvec(&t.dphi, &y[i]);
            let base = 5 + 10 * i;
            for r in 0..NV {
                for c in 0..NV {
                    jac.set(base + r, col(i, c), -t.phi[r][c]);
                }
                jac.set(base + r, col(i + 1, r), ONE);
                jac.set(base + r, col(i, 9), -ds[r]);
            }
            jac.set(base + 9, col(i, 9), -ONE);
            jac.set(base + 9, col(i + 1, 9), ONE);
        }
        let base = 5 + 10 * (n - 1);
        for (r, cond) in self.top.iter().enumerate() {
            for c in 0..NV {
                if cond.0[c] != ZERO {
                    jac.set(base + r, col(n - 1, c), cond.0[c]);
                }
            }
        }
        jac
    }
}

/// Inverse iteration at fixed σ on the nine-component system, followed by a
/// one-step estimate of σ from the last sweep.
fn inverse_iteration(
    problem: &StabilityProblem,
    seed: &[Vec9],
    sigma0: C,
    norm: usize,
    sweeps: usize,
) -> Result<(Vec<Vec9>, C), StabilityError> {
    let ctx = Context::new(problem, norm);
    let n = seed.len();
    let mut sigma0 = sigma0;
    let (op, transfers) = loop {
        let transfers = ctx.transfers(sigma0, true);
        let mut l = BandedMatrix::zeros(9 * n, 12, 13);
        let col = |i: usize, c: usize| 9 * i + c;
        for r in 0..4 {
            for c in 0..NV {
                if ctx.bottom[r].0[c] != ZERO {
                    l.set(r, col(0, c), ctx.bottom[r].0[c]);
                }
            }
        }
        for (i, t) in transfers.iter().enumerate() {
            let base = 4 + 9 * i;
            for r in 0..NV {
                for c in 0..NV {
                    l.set(base + r, col(i, c), -t.phi[r][c]);
                }
                l.set(base + r, col(i + 1, r), ONE);
            }
        }
        let base = 4 + 9 * (n - 1);
        for r in 0..5 {
            for c in 0..NV {
                if ctx.top[r].0[c] != ZERO {
                    l.set(base + r, col(n - 1, c), ctx.top[r].0[c]);
                }
            }
        }
        match l.factor() {
            Ok(lu) => break (lu, transfers),
            // σ0 sits on an eigenvalue of the discrete pencil; nudge it.
            Err(_) => sigma0 += C::new(1e-6 * sigma0.norm().max(1.0), 0.0),
        }
    };
    let mut y = seed.to_vec();
    let mut sigma = sigma0;
    for _ in 0..sweeps {
        // Right-hand side L'(σ0) y; only the collocation rows depend on σ.
        let mut rhs = vec![ZERO; 9 * n];
        for (i, t) in transfers.iter().enumerate() {
            let ds = matvec(&t.dphi, &y[i]);
            for r in 0..NV {
                rhs[4 + 9 * i + r] = -ds[r];
            }
        }
        let x = op.solve(&rhs);
        let lx = x[norm];
        if lx.norm() == 0.0 || !lx.is_finite() {
            break;
        }
        let ly = y[0][norm];
        sigma = sigma0 - ly / lx;
        y = (0..n).map(|i| std::array::from_fn(|c| x[9 * i + c] / lx)).collect();
    }
    Ok((y, sigma))
}
