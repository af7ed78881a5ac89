//! Dense generalized eigenvalue discretization used as a cross-check.
//!
//! Second-order differences for `W` and `T` on the cell faces, finite
//! volumes for `Θ` on the cell centres with the concentration flux
//! `F = DΘ - V_c M Θ + (ℵ1/2) Φ` vanishing at both walls. Independent of the
//! collocation solver apart from the coefficient profiles.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Coefficients, StabilityError, StabilityProblem};
use crate::params::Boundary;

/// All eigenvalues on the problem's own mesh (`N - 1` cells), rightmost first.
pub fn spectrum_oracle(problem: &StabilityProblem) -> Vec<Complex64> {
    let cells = problem.z().len() - 1;
    dense(problem, &problem.coefficients, cells)
}

/// All eigenvalues with `cells` uniform cells, rightmost first.
pub fn spectrum_oracle_with(problem: &StabilityProblem, cells: usize) -> Result<Vec<Complex64>, StabilityError> {
    assert!(cells >= 4, "need at least four cells");
    if cells + 1 == problem.z().len() {
        return Ok(spectrum_oracle(problem));
    }
    let fine = problem.basic.resample(2 * cells + 1)?;
    let coef = Coefficients::on_state(&fine)?;
    Ok(dense(problem, &coef, cells))
}

/// All eigenvalues using precomputed profiles with `2 cells + 1` samples
/// (faces and centres), rightmost first.
pub fn spectrum_on(problem: &StabilityProblem, coef: &Coefficients) -> Vec<Complex64> {
    assert!(coef.z.len() % 2 == 1 && coef.z.len() >= 9, "need faces and centres of at least four cells");
    dense(problem, coef, (coef.z.len() - 1) / 2)
}

/// Rightmost eigenvalue with `cells` cells; of a conjugate pair the one with
/// `Im σ ≥ 0`.
pub fn rightmost(problem: &StabilityProblem, cells: usize) -> Result<Complex64, StabilityError> {
    Ok(spectrum_oracle_with(problem, cells)?[0])
}

/// Rightmost eigenvalue extrapolated from `N - 1` and `2(N - 1)` cells.
///
/// The leading pair often sits close to a collision, where the eigenvalues
/// themselves are not smooth in the mesh spacing but their sum and product
/// are. Those two are extrapolated as `(4 s_{2N} - s_N)/3` and the quadratic
/// they define is solved for its rightmost root.
pub fn rightmost_refined(problem: &StabilityProblem) -> Result<Complex64, StabilityError> {
    let cells = problem.z().len() - 1;
    let coarse = spectrum_oracle_with(problem, cells)?;
    let fine = spectrum_oracle_with(problem, 2 * cells)?;
    let symmetric = |e: &[Complex64]| (e[0] + e[1], e[0] * e[1]);
    let (sc, pc) = symmetric(&coarse);
    let (sf, pf) = symmetric(&fine);
    let sum = ((4.0 * sf - sc) / 3.0).re;
    let product = ((4.0 * pf - pc) / 3.0).re;
    let disc = 0.25 * sum * sum - product;
    Ok(if disc >= 0.0 {
        Complex64::new(0.5 * sum + disc.sqrt(), 0.0)
    } else {
        Complex64::new(0.5 * sum, (-disc).sqrt())
    })
}

/// `coef` holds `2 cells + 1` samples: faces at even, centres at odd indices.
fn dense(problem: &StabilityProblem, coef: &Coefficients, cells: usize) -> Vec<Complex64> {
    assert_eq!(coef.z.len(), 2 * cells + 1);
    let p = &problem.basic.params;
    let (pr, le) = (p.prandtl, p.lewis);
    let k2 = problem.wavenumber * problem.wavenumber;
    let (rb, rt) = (problem.rayleigh_bio, problem.rayleigh_thermal);
    let nc = cells;
    let h = 1.0 / nc as f64;
    let (h2, h4) = (h * h, h * h * h * h);
    let nw = nc - 1;
    let dim = 3 * nc - 2;
    let iw = |j: usize| j - 1;
    let ith = |c: usize| nw + c;
    let it = |j: usize| nw + nc + j - 1;

    // Ghost value W_{-1} = ±W_1 (rigid: DW = 0, free: D²W = 0), same at the top.
    let mirror = |b: Boundary| if b == Boundary::Rigid { 1.0 } else { -1.0 };
    let (gb, gt) = (mirror(problem.bottom), mirror(problem.top));
    let w_ref = |j: isize| -> Option<(usize, f64)> {
        let n = nc as isize;
        if j == -1 {
            Some((iw(1), gb))
        } else if j == n + 1 {
            Some((iw(nc - 1), gt))
        } else if j <= 0 || j >= n {
            None
        } else {
            Some((iw(j as usize), 1.0))
        }
    };

    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut bw = DMatrix::<f64>::zeros(nw, nw);

    for j in 1..nc {
        let row = iw(j);
        let ji = j as isize;
        for (off, c4) in [(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)] {
            if let Some((col, s)) = w_ref(ji + off) {
                a[(row, col)] += s * c4 / h4;
            }
        }
        for (off, c2) in [(-1, 1.0), (0, -2.0), (1, 1.0)] {
            if let Some((col, _)) = w_ref(ji + off) {
                a[(row, col)] += -2.0 * k2 * c2 / h2;
                bw[(row, col)] += c2 / h2 / pr;
            }
        }
        a[(row, row)] += k2 * k2;
        bw[(row, row)] -= k2 / pr;
        a[(row, ith(j - 1))] += 0.5 * rb * k2;
        a[(row, ith(j))] += 0.5 * rb * k2;
        a[(row, it(j))] -= rt * k2;
    }

    // Flux through interior face j as coefficients on Θ.
    let face_flux = |j: usize| -> Vec<(usize, f64)> {
        let m = coef.aleph2[2 * j];
        let half_a1 = 0.5 * coef.aleph1[2 * j];
        let mut f = vec![(ith(j), 1.0 / h - 0.5 * m), (ith(j - 1), -1.0 / h - 0.5 * m)];
        for c in j..nc {
            f.push((ith(c), half_a1 * h));
        }
        f
    };
    for c in 0..nc {
        let row = ith(c);
        if c + 1 < nc {
            for (col, v) in face_flux(c + 1) {
                a[(row, col)] += v / h;
            }
        }
        if c > 0 {
            for (col, v) in face_flux(c) {
                a[(row, col)] -= v / h;
            }
        }
        a[(row, row)] -= k2;
        let forcing = -le * coef.dn[2 * c + 1] * 0.5;
        for j in [c, c + 1] {
            if j > 0 && j < nc {
                a[(row, iw(j))] += forcing;
            }
        }
    }

    for j in 1..nc {
        let row = it(j);
        a[(row, row)] += -2.0 / h2 - k2;
        if j > 1 {
            a[(row, it(j - 1))] += 1.0 / h2;
        }
        if j + 1 < nc {
            a[(row, it(j + 1))] += 1.0 / h2;
        }
        a[(row, iw(j))] += 1.0;
    }

    // Reduce A x = σ B x to a standard problem.
    let w_rows = a.rows(0, nw).into_owned();
    let solved = bw.lu().solve(&w_rows).expect("viscous operator is definite");
    a.rows_mut(0, nw).copy_from(&solved);
    for c in 0..nc {
        a.row_mut(ith(c)).scale_mut(1.0 / le);
    }

    let mut eig: Vec<Complex64> = a.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    eig
}
