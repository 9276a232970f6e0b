//! Information-gain diagnostics.

use nalgebra::DMatrix;

use super::KernelSpec;

/// `½ ln det(I + σ⁻² K_A)` for the multiset of designs `A`, all outputs observed.
pub fn empirical_info_gain(kernel: &KernelSpec, designs: &[Vec<f64>], noise_variance: f64) -> f64 {
    let m = kernel.output_dim();
    let n = designs.len() * m;
    if n == 0 {
        return 0.0;
    }
    let mut a = DMatrix::from_fn(n, n, |r, c| {
        kernel.design(&designs[r / m], &designs[c / m]) * kernel.output_kernel[r % m][c % m] / noise_variance
    });
    for i in 0..n {
        a[(i, i)] += 1.0;
    }
    let chol = a.cholesky().expect("I + K/σ² is positive definite");
    chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// Greedy sequential maximizer of information gain over a finite candidate
/// set, with replacement. Values are cached, so `gamma(t)` for increasing `t`
/// costs one greedy step per new round.
#[derive(Debug, Clone)]
pub struct GreedyInfoGain {
    m: usize,
    n: usize,
    noise_variance: f64,
    /// Joint posterior covariance over `(candidate, output)`, index `i * m + p`.
    cov: Vec<f64>,
    values: Vec<f64>,
    picks: Vec<usize>,
}

impl GreedyInfoGain {
    pub fn new(kernel: &KernelSpec, candidates: &[Vec<f64>], noise_variance: f64) -> Self {
        let m = kernel.output_dim();
        let n = candidates.len() * m;
        let mut cov = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                cov[r * n + c] =
                    kernel.design(&candidates[r / m], &candidates[c / m]) * kernel.output_kernel[r % m][c % m];
            }
        }
        Self { m, n, noise_variance, cov, values: vec![0.0], picks: Vec::new() }
    }

    /// `γ̂_t`; `gamma(0) = 0`.
    pub fn gamma(&mut self, t: usize) -> f64 {
        while self.values.len() <= t {
            self.step();
        }
        self.values[t]
    }

    /// Candidate indices chosen so far, in order.
    pub fn picks(&self) -> &[usize] {
        &self.picks
    }

    fn block(&self, i: usize) -> DMatrix<f64> {
        let m = self.m;
        DMatrix::from_fn(m, m, |p, q| self.cov[(i * m + p) * self.n + i * m + q])
    }

    fn step(&mut self) {
        let m = self.m;
        let count = self.n / m;
        let mut best = (0usize, f64::NEG_INFINITY);
        for i in 0..count {
            let mut b = self.block(i) / self.noise_variance;
            for p in 0..m {
                b[(p, p)] += 1.0;
            }
            let gain = 0.5 * b.determinant().max(1.0).ln();
            if gain > best.1 {
                best = (i, gain);
            }
        }
        let (i, gain) = best;
        let last = *self.values.last().unwrap();
        self.values.push(last + gain);
        self.picks.push(i);

        // Σ ← Σ − Σ[:, B] (Σ_BB + σ² I)⁻¹ Σ[B, :]
        let mut s = self.block(i);
        for p in 0..m {
            s[(p, p)] += self.noise_variance;
        }
        let inv = s.try_inverse().expect("noisy block is invertible");
        let n = self.n;
        let cols: Vec<Vec<f64>> = (0..m).map(|p| (0..n).map(|r| self.cov[r * n + i * m + p]).collect()).collect();
        // g[q][r] = Σ_p inv[q][p] * cols[p][r]
        let g: Vec<Vec<f64>> = (0..m)
            .map(|q| (0..n).map(|r| (0..m).map(|p| inv[(q, p)] * cols[p][r]).sum()).collect())
            .collect();
        for r in 0..n {
            for c in 0..n {
                let mut d = 0.0;
                for q in 0..m {
                    d += cols[q][r] * g[q][c];
                }
                self.cov[r * n + c] -= d;
            }
        }
    }
}

/// Greedy estimate `γ̂_t` of the maximum information gain after `t` picks.
pub fn greedy_max_info_gain(kernel: &KernelSpec, candidates: &[Vec<f64>], t: usize, noise_variance: f64) -> f64 {
    GreedyInfoGain::new(kernel, candidates, noise_variance).gamma(t)
}
