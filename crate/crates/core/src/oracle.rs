//! Independent reference solutions used to validate the solvers.
//!
//! Everything here is closed form or a scalar root-find on a classical
//! characteristic equation; none of it shares code with the stability solver.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::phototaxis::{Phototaxis, TaxisFunction};

/// Wall pair for the cell-free convection limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryPair {
    RigidRigid,
    /// Rigid bottom, stress-free top.
    RigidFree,
    FreeFree,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenardSetup {
    pub walls: BoundaryPair,
    pub wavenumber: f64,
}

/// Thermal Rayleigh number on the stationary neutral curve of a cell-free
/// layer heated from below.
///
/// Free–free walls use `(k² + π²)³ / k²`; the other pairs find the lowest
/// root of the sixth-order characteristic determinant by bisection.
pub fn benard_neutral(setup: BenardSetup) -> f64 {
    let k = setup.wavenumber;
    assert!(k > 0.0, "wavenumber must be positive");
    match setup.walls {
        BoundaryPair::FreeFree => (k * k + PI * PI).powi(3) / (k * k),
        walls => lowest_root(walls, k),
    }
}

/// Minimum of the neutral curve over `k`, as `(k_c, R_c)`.
pub fn benard_critical(walls: BoundaryPair) -> (f64, f64) {
    let f = |k: f64| benard_neutral(BenardSetup { walls, wavenumber: k });
    golden_min(f, 1.0, 6.0, 1e-9)
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let k = 0.5 * (a + b);
    (k, f(k))
}

/// Characteristic determinant for `(D² - k²)³ W = -R k² W` with the wall
/// conditions `W = 0`, `DW = 0` or `D²W = 0`, and `(D² - k²)² W = 0`.
///
/// Built from `cosh(q z)` and `sinh(q z)/q`, which depend on `q²` only, so no
/// branch of the square root needs to be chosen.
fn characteristic_determinant(walls: BoundaryPair, k: f64, r: f64) -> f64 {
    let c = (r * k * k).cbrt();
    let roots = [
        Complex64::new(-1.0, 0.0),
        Complex64::from_polar(1.0, PI / 3.0),
        Complex64::from_polar(1.0, -PI / 3.0),
    ];
    let (bottom_rigid, top_rigid) = match walls {
        BoundaryPair::RigidRigid => (true, true),
        BoundaryPair::RigidFree => (true, false),
        BoundaryPair::FreeFree => (false, false),
    };
    let mut m = [[Complex64::new(0.0, 0.0); 6]; 6];
    for (j, w) in roots.iter().enumerate() {
        let q2 = Complex64::new(k * k, 0.0) + c * w;
        let q = q2.sqrt();
        let shift2 = (q2 - k * k) * (q2 - k * k);
        // Values, first and second derivatives of cosh(qz) and sinh(qz)/q.
        let eval = |z: f64| {
            let ch = (q * z).cosh();
            let sh_over_q = if q.norm() < 1e-8 { Complex64::new(z, 0.0) } else { (q * z).sinh() / q };
            ([ch, q2 * sh_over_q, q2 * ch], [sh_over_q, ch, q2 * sh_over_q])
        };
        for (side, z, rigid) in [(0usize, 0.0, bottom_rigid), (3usize, 1.0, top_rigid)] {
            let (cs, ss) = eval(z);
            for (col, f) in [(2 * j, cs), (2 * j + 1, ss)] {
                m[side][col] = f[0];
                m[side + 1][col] = if rigid { f[1] } else { f[2] };
                m[side + 2][col] = shift2 * f[0];
            }
        }
    }
    det6(m).re
}

fn det6(mut m: [[Complex64; 6]; 6]) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..6 {
        let p = (col..6).max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm())).unwrap();
        if m[p][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..6 {
            let f = m[r][col] / m[col][col];
            for c in col..6 {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
        }
    }
    det
}

fn lowest_root(walls: BoundaryPair, k: f64) -> f64 {
    let f = |r: f64| characteristic_determinant(walls, k, r);
    let mut lo = 10.0;
    let mut f_lo = f(lo);
    loop {
        let hi = lo * 1.01;
        let f_hi = f(hi);
        if f_lo.signum() != f_hi.signum() {
            let (mut a, mut b, mut fa) = (lo, hi, f_lo);
            while b - a > 1e-10 {
                let mid = 0.5 * (a + b);
                let fm = f(mid);
                if fm.signum() == fa.signum() {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            return 0.5 * (a + b);
        }
        assert!(hi < 1e9, "no neutral Rayleigh number found below 1e9");
        lo = hi;
        f_lo = f_hi;
    }
}

/// Closed-form basic concentration for light-independent swimming
/// `M ≡ M_0`: `n_s(z) = λ e^{λz} / (e^λ - 1)` with `λ = V_c M_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticConcentration {
    pub lambda: f64,
}

impl AnalyticConcentration {
    pub fn eval(&self, z: f64) -> f64 {
        let l = self.lambda;
        if l.abs() < 1e-12 {
            1.0
        } else {
            l * (l * z).exp() / l.exp_m1()
        }
    }
}

pub fn analytic_concentration(swim_speed: f64, taxis_value: f64) -> AnalyticConcentration {
    AnalyticConcentration { lambda: swim_speed * taxis_value }
}

/// Outcome of a derivative audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    pub passed: bool,
    /// Largest `|fd - df| / max(1, |df|)` seen.
    pub max_error: f64,
    pub worst_at: f64,
}

/// Compares `df` with central differences of `f` on 201 points of `[a, b]`.
pub fn fd_derivative_check<F, D>(f: F, df: D, domain: (f64, f64), tol: f64) -> FdReport
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let h = 1e-6;
    let (a, b) = domain;
    let mut report = FdReport { passed: true, max_error: 0.0, worst_at: a };
    for i in 0..=200 {
        let x = a + (b - a) * i as f64 / 200.0;
        let fd = (f(x + h) - f(x - h)) / (2.0 * h);
        let exact = df(x);
        let err = (fd - exact).abs() / exact.abs().max(1.0);
        if err > report.max_error {
            report.max_error = err;
            report.worst_at = x;
        }
    }
    report.passed = report.max_error <= tol;
    report
}

/// Audit of the configured phototaxis derivative over `[0, g_max]`.
pub fn taxis_derivative_check(taxis: &TaxisFunction, g_max: f64, tol: f64) -> FdReport {
    fd_derivative_check(|g| taxis.value(g), |g| taxis.derivative(g), (1e-5, g_max), tol)
}
