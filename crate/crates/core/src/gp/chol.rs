//! Growable dense Cholesky factor.

use super::GpError;

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-6;

/// Lower-triangular `L` with `L L^T = A`, stored row-major and packed by row.
#[derive(Debug, Clone, Default)]
pub(crate) struct Chol {
    n: usize,
    /// Row `i` occupies `rows[i*(i+1)/2 .. i*(i+1)/2 + i + 1]`.
    rows: Vec<f64>,
    pub(crate) jitter: f64,
}

impl Chol {
    pub(crate) fn dim(&self) -> usize {
        self.n
    }

    fn row(&self, i: usize) -> &[f64] {
        let s = i * (i + 1) / 2;
        &self.rows[s..s + i + 1]
    }

    /// Factors the symmetric matrix given by `entry(i, j)` (`j <= i`),
    /// escalating diagonal jitter from 1e-10 to 1e-6 on failure.
    pub(crate) fn factor(n: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self, GpError> {
        let mut jitter = 0.0;
        loop {
            let mut c = Chol { n: 0, rows: Vec::with_capacity(n * (n + 1) / 2), jitter };
            let mut ok = true;
            for i in 0..n {
                let col: Vec<f64> = (0..i).map(|j| entry(i, j)).collect();
                if c.append(&col, entry(i, i) + jitter).is_err() {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(c);
            }
            jitter = if jitter == 0.0 { JITTER_START } else { jitter * 10.0 };
            if jitter > JITTER_MAX * 1.0000001 {
                return Err(GpError::FactorizationFailure);
            }
        }
    }

    /// Appends one row/column: `cross[j] = A[n, j]` for existing `j`, `diag = A[n, n]`.
    pub(crate) fn append(&mut self, cross: &[f64], diag: f64) -> Result<(), GpError> {
        debug_assert_eq!(cross.len(), self.n);
        let l = self.solve_lower(cross);
        let d2 = diag - l.iter().map(|v| v * v).sum::<f64>();
        if !(d2 > 0.0) || !d2.is_finite() {
            return Err(GpError::FactorizationFailure);
        }
        self.rows.extend_from_slice(&l);
        self.rows.push(d2.sqrt());
        self.n += 1;
        Ok(())
    }

    /// Solves `L x = b`.
    pub(crate) fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        for i in 0..self.n {
            let r = self.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= r[j] * x[j];
            }
            x[i] = s / r[i];
        }
        x
    }

    /// Solves `L^T x = b`.
    pub(crate) fn solve_upper(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        for i in (0..self.n).rev() {
            let r = self.row(i);
            x[i] /= r[i];
            let xi = x[i];
            for j in 0..i {
                x[j] -= r[j] * xi;
            }
        }
        x
    }

    /// Solves `A x = b`.
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    pub(crate) fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.row(i)[i].ln()).sum::<f64>()
    }

    /// Dense copy of `L` (tests and diagnostics).
    #[cfg(test)]
    pub(crate) fn dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.resize(self.n, 0.0);
                r
            })
            .collect()
    }
}
