//! Type-II maximum likelihood for the SE-ARD kernel.
//!
//! Outputs are modeled as independent with shared lengthscales and their own
//! prior variance `v_p <= 1`, i.e. `B = diag(v)` and unit signal variance.

use std::f64::consts::LN_10;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GpError, KernelSpec};

const LOG_LS_BOUNDS: (f64, f64) = (-2.0 * LN_10, LN_10); // [0.01, 10]
const LOG_VAR_BOUNDS: (f64, f64) = (-3.0 * LN_10, 0.0); // [1e-3, 1]

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Larger datasets are subsampled to this many points.
    pub max_points: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { restarts: 5, max_iters: 100, max_points: 256, seed: 0 }
    }
}

/// Result of a fit, with the likelihood at every restart's starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub kernel: KernelSpec,
    pub log_likelihood: f64,
    pub initial_log_likelihoods: Vec<f64>,
}

/// Fits lengthscales and per-output variances by multi-start projected
/// gradient ascent on the log marginal likelihood.
pub fn fit_hyperparameters(
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    noise_variance: f64,
    opts: &FitOptions,
) -> Result<FitReport, GpError> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return Err(GpError::TooFewPoints(2));
    }
    let d = xs[0].len();
    let m = ys[0].len();
    if let Some(x) = xs.iter().find(|x| x.len() != d) {
        return Err(GpError::DimensionMismatch { expected: d, got: x.len() });
    }
    if let Some(y) = ys.iter().find(|y| y.len() != m) {
        return Err(GpError::DimensionMismatch { expected: m, got: y.len() });
    }
    if xs.iter().chain(ys).flatten().any(|v| !v.is_finite()) {
        return Err(GpError::NonFiniteInput);
    }
    if xs.iter().all(|x| x == &xs[0]) {
        return Err(GpError::DegenerateData);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let chosen: Vec<usize> = if xs.len() > opts.max_points {
        let mut idx = sample(&mut rng, xs.len(), opts.max_points).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..xs.len()).collect()
    };
    let data = Data {
        xs: chosen.iter().map(|&i| xs[i].clone()).collect(),
        ys: (0..m).map(|p| DVector::from_iterator(chosen.len(), chosen.iter().map(|&i| ys[i][p]))).collect(),
        noise: noise_variance,
        d,
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut initial = Vec::new();
    for r in 0..opts.restarts.max(1) {
        let mut theta = Vec::with_capacity(d + m);
        if r == 0 {
            theta.extend(std::iter::repeat_n(0.2f64.ln(), d));
            for p in 0..m {
                let y = &data.ys[p];
                let var = y.map(|v| v * v).mean() - y.mean().powi(2);
                theta.push(var.clamp(1e-3, 1.0).ln());
            }
        } else {
            theta.extend((0..d).map(|_| rng.random_range(0.05f64.ln()..0.0)));
            theta.extend((0..m).map(|_| rng.random_range(0.05f64.ln()..0.0)));
        }
        let (l0, _) = data.objective(&theta)?;
        initial.push(l0);
        let (theta, l) = ascend(&data, theta, opts.max_iters)?;
        if best.as_ref().is_none_or(|(_, bl)| l > *bl) {
            best = Some((theta, l));
        }
    }
    let (theta, log_likelihood) = best.expect("at least one restart");
    let mut output_kernel = super::identity(m);
    for p in 0..m {
        output_kernel[p][p] = theta[d + p].exp();
    }
    let kernel = KernelSpec::new(theta[..d].iter().map(|v| v.exp()).collect(), 1.0, output_kernel)?;
    Ok(FitReport { kernel, log_likelihood, initial_log_likelihoods: initial })
}

/// Log marginal likelihood of independent outputs under `kernel`.
pub fn log_marginal_likelihood(
    kernel: &KernelSpec,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    noise_variance: f64,
) -> Result<f64, GpError> {
    let n = xs.len();
    let mut total = 0.0;
    for p in 0..kernel.output_dim() {
        let b = kernel.output_kernel[p][p];
        let mut k = DMatrix::from_fn(n, n, |i, j| b * kernel.design(&xs[i], &xs[j]));
        for i in 0..n {
            k[(i, i)] += noise_variance;
        }
        let chol = k.cholesky().ok_or(GpError::FactorizationFailure)?;
        let y = DVector::from_iterator(n, ys.iter().map(|v| v[p]));
        let alpha = chol.solve(&y);
        let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        total += -0.5 * y.dot(&alpha) - 0.5 * log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    }
    Ok(total)
}

struct Data {
    xs: Vec<Vec<f64>>,
    ys: Vec<DVector<f64>>,
    noise: f64,
    d: usize,
}

impl Data {
    /// Log likelihood and its gradient in `θ = (ln ℓ, ln v)`.
    fn objective(&self, theta: &[f64]) -> Result<(f64, Vec<f64>), GpError> {
        let n = self.xs.len();
        let d = self.d;
        let ls: Vec<f64> = theta[..d].iter().map(|v| v.exp()).collect();
        // Scaled squared differences per dimension.
        let mut sq = vec![DMatrix::<f64>::zeros(n, n); d];
        let kt = DMatrix::from_fn(n, n, |i, j| {
            let mut r2 = 0.0;
            for k in 0..d {
                let s = ((self.xs[i][k] - self.xs[j][k]) / ls[k]).powi(2);
                r2 += s;
            }
            (-0.5 * r2).exp()
        });
        for (k, mat) in sq.iter_mut().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    mat[(i, j)] = ((self.xs[i][k] - self.xs[j][k]) / ls[k]).powi(2);
                }
            }
        }
        let mut value = 0.0;
        let mut grad = vec![0.0; theta.len()];
        for (p, y) in self.ys.iter().enumerate() {
            let v = theta[d + p].exp();
            let mut k = &kt * v;
            for i in 0..n {
                k[(i, i)] += self.noise;
            }
            let chol = k.cholesky().ok_or(GpError::FactorizationFailure)?;
            let alpha = chol.solve(y);
            let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|t| t.ln()).sum::<f64>();
            value += -0.5 * y.dot(&alpha) - 0.5 * log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
            // W = α αᵀ − K⁻¹; dL/dθ = ½ tr(W dK/dθ)
            let w = &alpha * alpha.transpose() - chol.inverse();
            let wk = w.component_mul(&kt) * v;
            grad[d + p] += 0.5 * wk.sum();
            for (k, mat) in sq.iter().enumerate() {
                grad[k] += 0.5 * wk.component_mul(mat).sum();
            }
        }
        Ok((value, grad))
    }
}

fn project(theta: &mut [f64], d: usize) {
    for (i, t) in theta.iter_mut().enumerate() {
        let (lo, hi) = if i < d { LOG_LS_BOUNDS } else { LOG_VAR_BOUNDS };
        *t = t.clamp(lo, hi);
    }
}

fn ascend(data: &Data, mut theta: Vec<f64>, max_iters: usize) -> Result<(Vec<f64>, f64), GpError> {
    project(&mut theta, data.d);
    let (mut value, mut grad) = data.objective(&theta)?;
    let mut step = 0.1 / (1.0 + grad.iter().map(|g| g * g).sum::<f64>().sqrt());
    for _ in 0..max_iters {
        let mut accepted = false;
        while step > 1e-12 {
            let mut cand: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t + step * g).collect();
            project(&mut cand, data.d);
            let moved: f64 = cand.iter().zip(&theta).zip(&grad).map(|((c, t), g)| (c - t) * g).sum();
            if moved <= 0.0 {
                break;
            }
            match data.objective(&cand) {
                Ok((v, g)) if v >= value + 1e-4 * moved => {
                    let gain = v - value;
                    theta = cand;
                    value = v;
                    grad = g;
                    step *= 2.0;
                    accepted = gain > 1e-9 * (1.0 + value.abs());
                    break;
                }
                _ => step *= 0.5,
            }
        }
        if !accepted {
            break;
        }
    }
    Ok((theta, value))
}
