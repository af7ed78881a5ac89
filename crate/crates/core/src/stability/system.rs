//! First-order form of the perturbation equations.
//!
//! State `y = [W, DW, D²W, D³W, Φ, DΦ, D²Φ, T, DT]` with `Φ(z) = ∫_z^1 Θ dz'`:
//!
//! ```text
//! D⁴W = (2k² + σ/Pr) D²W - k²(k² + σ/Pr) W + R_b k² DΦ + R_T k² T
//! D³Φ = ℵ2 D²Φ + (σ Le + k² + ℵ1) DΦ - ℵ0 Φ - Le (Dn_s) W
//! D²T = (k² + σ) T - W
//! ```

use num_complex::Complex64;

pub(crate) const NV: usize = 9;
pub(crate) type C = Complex64;
pub(crate) type Vec9 = [C; NV];
pub(crate) type Mat9 = [[C; NV]; NV];

pub(crate) const ZERO: C = C::new(0.0, 0.0);
pub(crate) const ONE: C = C::new(1.0, 0.0);

pub(crate) const W: usize = 0;
pub(crate) const DW: usize = 1;
pub(crate) const D2W: usize = 2;
pub(crate) const D3W: usize = 3;
pub(crate) const PHI: usize = 4;
pub(crate) const DPHI: usize = 5;
pub(crate) const D2PHI: usize = 6;
pub(crate) const T: usize = 7;
pub(crate) const DT: usize = 8;

/// Basic-state coefficients at one height.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Local {
    pub dn: f64,
    pub aleph0: f64,
    pub aleph1: f64,
    pub aleph2: f64,
}

/// Scalar parameters of one eigenproblem.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Groups {
    pub k2: f64,
    pub rayleigh_bio: f64,
    pub rayleigh_thermal: f64,
    pub inv_prandtl: f64,
    pub lewis: f64,
}

#[cfg(test)]
pub(crate) fn rhs(g: &Groups, c: &Local, y: &Vec9, sigma: C) -> Vec9 {
    let k2 = g.k2;
    let s_pr = sigma * g.inv_prandtl;
    let mut f = [ZERO; NV];
    f[W] = y[DW];
    f[DW] = y[D2W];
    f[D2W] = y[D3W];
    f[D3W] = (2.0 * k2 + s_pr) * y[D2W] - k2 * (k2 + s_pr) * y[W]
        + g.rayleigh_bio * k2 * y[DPHI]
        + g.rayleigh_thermal * k2 * y[T];
    f[PHI] = y[DPHI];
    f[DPHI] = y[D2PHI];
    f[D2PHI] = c.aleph2 * y[D2PHI] + (sigma * g.lewis + k2 + c.aleph1) * y[DPHI] - c.aleph0 * y[PHI]
        - g.lewis * c.dn * y[W];
    f[T] = y[DT];
    f[DT] = (k2 + sigma) * y[T] - y[W];
    f
}

/// `∂f/∂y`.
pub(crate) fn jacobian(g: &Groups, c: &Local, sigma: C) -> Mat9 {
    let k2 = g.k2;
    let s_pr = sigma * g.inv_prandtl;
    let mut j = [[ZERO; NV]; NV];
    j[W][DW] = ONE;
    j[DW][D2W] = ONE;
    j[D2W][D3W] = ONE;
    j[D3W][W] = -k2 * (k2 + s_pr);
    j[D3W][D2W] = 2.0 * k2 + s_pr;
    j[D3W][DPHI] = C::from(g.rayleigh_bio * k2);
    j[D3W][T] = C::from(g.rayleigh_thermal * k2);
    j[PHI][DPHI] = ONE;
    j[DPHI][D2PHI] = ONE;
    j[D2PHI][W] = C::from(-g.lewis * c.dn);
    j[D2PHI][PHI] = C::from(-c.aleph0);
    j[D2PHI][DPHI] = sigma * g.lewis + k2 + c.aleph1;
    j[D2PHI][D2PHI] = C::from(c.aleph2);
    j[T][DT] = ONE;
    j[DT][W] = -ONE;
    j[DT][T] = k2 + sigma;
    j
}

/// `∂f/∂σ`.
pub(crate) fn sigma_derivative(g: &Groups, y: &Vec9) -> Vec9 {
    let mut d = [ZERO; NV];
    d[D3W] = g.inv_prandtl * (y[D2W] - g.k2 * y[W]);
    d[D2PHI] = g.lewis * y[DPHI];
    d[DT] = y[T];
    d
}
