//! Adaptive Dormand–Prince 5(4) integrator with output on a prescribed grid.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at z = {z} (h = {h:e})")]
    StepUnderflow { z: f64, h: f64 },
    #[error("too many steps ({0}) before reaching the end of the interval")]
    TooManySteps(usize),
    #[error("non-finite state at z = {0}")]
    NonFinite(f64),
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct DormandPrince {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for DormandPrince {
    fn default() -> Self {
        DormandPrince { atol: 1e-12, rtol: 1e-12, max_steps: 1_000_000 }
    }
}

impl DormandPrince {
    /// Integrates `y' = f(z, y)` from `(z0, y0)` and returns the state at each
    /// entry of `outputs`, which must be monotone and lie on one side of `z0`.
    pub fn integrate<const D: usize, F>(
        &self,
        f: F,
        z0: f64,
        y0: [f64; D],
        outputs: &[f64],
    ) -> Result<Vec<[f64; D]>, OdeError>
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
    {
        let mut out = Vec::with_capacity(outputs.len());
        let Some(&last) = outputs.last() else {
            return Ok(out);
        };
        let dir = if last >= z0 { 1.0 } else { -1.0 };
        let span = (last - z0).abs();
        let mut z = z0;
        let mut y = y0;
        let mut h = dir * (span * 1e-3).max(1e-6);
        let mut k = [[0.0; D]; 7];
        k[0] = f(z, &y);
        let mut steps = 0;

        for &target in outputs {
            while (target - z) * dir > 0.0 {
                if steps >= self.max_steps {
                    return Err(OdeError::TooManySteps(steps));
                }
                let remaining = target - z;
                let mut step = h;
                let hit = step.abs() >= remaining.abs();
                if hit {
                    step = remaining;
                }
                let (y_new, err) = self.attempt(&f, z, &y, step, &mut k);
                steps += 1;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if err <= 1.0 {
                    if y_new.iter().any(|v| !v.is_finite()) {
                        return Err(OdeError::NonFinite(z + step));
                    }
                    z = if hit { target } else { z + step };
                    y = y_new;
                    // FSAL: the last stage is the derivative at the new point.
                    k[0] = k[6];
                    if !hit || fac < 1.0 {
                        h = step * fac;
                    }
                } else {
                    h = step * fac;
                    if h.abs() < 1e-14 * (1.0 + z.abs()) {
                        return Err(OdeError::StepUnderflow { z, h });
                    }
                }
            }
            out.push(y);
        }
        Ok(out)
    }

    fn attempt<const D: usize, F>(&self, f: &F, z: f64, y: &[f64; D], h: f64, k: &mut [[f64; D]; 7]) -> ([f64; D], f64)
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
    {
        for s in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for d in 0..D {
                        ys[d] += h * a * kj[d];
                    }
                }
            }
            k[s] = f(z + C[s] * h, &ys);
        }
        // Stage 7 was evaluated at the fifth-order solution.
        let mut y_new = *y;
        for (j, kj) in k.iter().enumerate().take(6) {
            for d in 0..D {
                y_new[d] += h * A[6][j] * kj[d];
            }
        }
        let mut acc = 0.0;
        for d in 0..D {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[d];
            }
            let scale = self.atol + self.rtol * y[d].abs().max(y_new[d].abs());
            acc += (h * e / scale).powi(2);
        }
        (y_new, (acc / D as f64).sqrt())
    }
}
