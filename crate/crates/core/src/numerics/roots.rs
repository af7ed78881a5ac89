//! Bracketed scalar root finding.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError<E> {
    #[error("root not bracketed: f({a}) = {fa}, f({b}) = {fb}")]
    NotBracketed { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("no convergence after {0} iterations")]
    MaxIterations(usize),
    #[error(transparent)]
    Eval(E),
}

/// Brent's method on `[a, b]` with `f(a) f(b) <= 0`, given the end values.
///
/// Stops when `|f(x)| <= ftol` or the bracket is narrower than `xtol`.
#[allow(clippy::too_many_arguments)]
pub fn brent<E, F>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<f64, RootError<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NotBracketed { a, b, fa, fb });
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut bisected = true;
    for _ in 0..max_iter {
        if fb.abs() <= ftol || (b - a).abs() <= xtol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let out_of_range = !((s > lo.min(b)) && (s < lo.max(b)));
        let slow = if bisected {
            (s - b).abs() >= (b - c).abs() / 2.0 || (b - c).abs() < xtol
        } else {
            (s - b).abs() >= (c - d).abs() / 2.0 || (c - d).abs() < xtol
        };
        bisected = out_of_range || slow;
        if bisected {
            s = 0.5 * (a + b);
        }
        let fs = f(s).map_err(RootError::Eval)?;
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    if fb.abs() <= ftol {
        Ok(b)
    } else {
        Err(RootError::MaxIterations(max_iter))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(x: f64) -> Result<f64, ()> {
        Ok(x * x * x - 2.0 * x - 5.0)
    }

    #[test]
    fn cubic_root() {
        let r = brent(ok, 2.0, 3.0, ok(2.0).unwrap(), ok(3.0).unwrap(), 1e-14, 1e-14, 100).unwrap();
        assert!((r - 2.0945514815423265).abs() < 1e-12);
    }

    #[test]
    fn unbracketed() {
        let err = brent(ok, 3.0, 4.0, ok(3.0).unwrap(), ok(4.0).unwrap(), 1e-12, 1e-12, 50).unwrap_err();
        assert!(matches!(err, RootError::NotBracketed { .. }));
    }
}
