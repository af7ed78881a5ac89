//! Complex banded matrices with an LU factorization using partial pivoting.
//!
//! Row `i` stores columns `i - kl ..= i + ku + kl`; the extra `kl` columns
//! hold fill-in created by row interchanges.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("matrix is singular to working precision at pivot {pivot}")]
pub struct SingularMatrix {
    pub pivot: usize,
}

#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandedMatrix { n, kl, ku, width, data: vec![Complex64::new(0.0, 0.0); n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(col + self.kl >= row && col <= row + self.ku + self.kl, "({row}, {col}) outside band");
        row * self.width + (col + self.kl - row)
    }

    /// Sets an entry inside the declared band.
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        assert!(
            col + self.kl >= row && col <= row + self.ku,
            "entry ({row}, {col}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let idx = self.index(row, col);
        self.data[idx] = value;
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        if col + self.kl < row || col > row + self.ku + self.kl {
            return Complex64::new(0.0, 0.0);
        }
        self.data[self.index(row, col)]
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + self.kl).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn factor(mut self) -> Result<BandedLu, SingularMatrix> {
        let n = self.n;
        let mut pivots = vec![0usize; n];
        let scale = self.data.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).norm();
            for r in k + 1..=last_row {
                let v = self.get(r, k).norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= scale * 1e-300 || !best.is_finite() {
                return Err(SingularMatrix { pivot: k });
            }
            pivots[k] = p;
            let last_col = (k + self.ku + self.kl).min(n - 1);
            if p != k {
                for c in k..=last_col {
                    let (a, b) = (self.index(k, c), self.index(p, c));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.index(k, k)];
            for r in k + 1..=last_row {
                let ir = self.index(r, k);
                if self.data[ir] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let factor = self.data[ir] / pivot;
                self.data[ir] = factor;
                for c in k + 1..=last_col {
                    let kc = self.data[self.index(k, c)];
                    let rc = self.index(r, c);
                    self.data[rc] -= factor * kc;
                }
            }
        }
        Ok(BandedLu { m: self, pivots })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    m: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.m.n;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let last_row = (k + self.m.kl).min(n - 1);
            let xk = x[k];
            for r in k + 1..=last_row {
                x[r] -= self.m.get(r, k) * xk;
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + self.m.ku + self.m.kl).min(n - 1);
            let mut s = x[k];
            for c in k + 1..=last_col {
                s -= self.m.get(k, c) * x[c];
            }
            x[k] = s / self.m.get(k, k);
        }
        x
    }
}
