//! Multi-output Gaussian-process surrogate with a separable kernel
//! `k((x, p), (x', q)) = k̃(x, x') B[p][q]`.
//!
//! `k̃` is a squared-exponential kernel with ARD lengthscales. When the output
//! kernel `B` is diagonal the outputs are independent and each gets its own
//! `t × t` factor; otherwise a joint `Mt × Mt` factor is kept.
//!
//! Repeated observations of the same design are folded into one Gram row with
//! noise `σ²/n` on the mean observation. The posterior is identical to the one
//! obtained from the full list, and the Gram matrix never exceeds the number of
//! distinct designs.

mod chol;
mod fit;
mod info;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convex::Hyperrectangle;
use chol::Chol;

pub use fit::{fit_hyperparameters, log_marginal_likelihood, FitOptions, FitReport};
pub use info::{empirical_info_gain, greedy_max_info_gain, GreedyInfoGain};

/// Full refactorization cadence, in conditionings.
const REFACTOR_EVERY: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpError {
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Gram matrix is not positive definite even after jitter")]
    FactorizationFailure,
    #[error("all designs are identical")]
    DegenerateData,
    #[error("need at least {0} data points")]
    TooFewPoints(usize),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
}

/// Separable kernel: SE-ARD over designs times an output covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub output_kernel: Vec<Vec<f64>>,
}

impl KernelSpec {
    pub fn new(lengthscales: Vec<f64>, signal_variance: f64, output_kernel: Vec<Vec<f64>>) -> Result<Self, GpError> {
        let k = Self { lengthscales, signal_variance, output_kernel };
        k.validate()?;
        Ok(k)
    }

    /// Isotropic lengthscale, unit variance, independent outputs.
    pub fn isotropic(input_dim: usize, output_dim: usize, lengthscale: f64) -> Self {
        Self {
            lengthscales: vec![lengthscale; input_dim],
            signal_variance: 1.0,
            output_kernel: identity(output_dim),
        }
    }

    pub fn validate(&self) -> Result<(), GpError> {
        let bad = |m: &str| Err(GpError::InvalidKernel(m.to_string()));
        if self.lengthscales.is_empty() || self.lengthscales.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return bad("lengthscales must be positive and finite");
        }
        if !(self.signal_variance > 0.0) || !self.signal_variance.is_finite() {
            return bad("signal variance must be positive");
        }
        let m = self.output_kernel.len();
        if m == 0 || self.output_kernel.iter().any(|r| r.len() != m) {
            return bad("output kernel must be square and nonempty");
        }
        for i in 0..m {
            for j in 0..i {
                if (self.output_kernel[i][j] - self.output_kernel[j][i]).abs() > 1e-12 {
                    return bad("output kernel must be symmetric");
                }
            }
        }
        if Chol::factor(m, |i, j| self.output_kernel[i][j]).map_or(true, |c| c.jitter > 0.0) {
            return bad("output kernel must be positive definite");
        }
        if (0..m).any(|p| self.signal_variance * self.output_kernel[p][p] > 1.0 + 1e-12) {
            return bad("prior variance of every output must be at most 1");
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.lengthscales.len()
    }

    pub fn output_dim(&self) -> usize {
        self.output_kernel.len()
    }

    /// Design kernel `k̃(x, x2)`, including the signal variance.
    pub fn design(&self, x: &[f64], x2: &[f64]) -> f64 {
        let r2: f64 = x
            .iter()
            .zip(x2)
            .zip(&self.lengthscales)
            .map(|((a, b), l)| ((a - b) / l).powi(2))
            .sum();
        self.signal_variance * (-0.5 * r2).exp()
    }

    /// Prior variance of output `p` at any design.
    pub fn prior_variance(&self, p: usize) -> f64 {
        self.signal_variance * self.output_kernel[p][p]
    }

    pub fn has_independent_outputs(&self) -> bool {
        let m = self.output_dim();
        (0..m).all(|i| (0..m).all(|j| i == j || self.output_kernel[i][j] == 0.0))
    }
}

pub(crate) fn identity(m: usize) -> Vec<Vec<f64>> {
    (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

#[derive(Debug, Clone)]
enum Factors {
    /// One factor per output of `B_pp K̃ + σ² N⁻¹`.
    Independent(Vec<Chol>),
    /// Joint factor, index `i * M + p`.
    Joint(Chol),
}

/// GP posterior state over observed designs.
#[derive(Debug, Clone)]
pub struct SurrogateModel {
    kernel: KernelSpec,
    noise_variance: f64,
    observations: Vec<(Vec<f64>, Vec<f64>)>,
    unique: Vec<Vec<f64>>,
    counts: Vec<usize>,
    sums: Vec<Vec<f64>>,
    lookup: HashMap<Vec<u64>, usize>,
    factors: Factors,
    /// Per output (independent) or a single joint vector.
    alpha: Vec<Vec<f64>>,
    since_refactor: usize,
}

impl SurrogateModel {
    pub fn new(kernel: KernelSpec, noise_variance: f64) -> Result<Self, GpError> {
        kernel.validate()?;
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(GpError::InvalidKernel("noise variance must be positive".into()));
        }
        let m = kernel.output_dim();
        let factors = if kernel.has_independent_outputs() {
            Factors::Independent(vec![Chol::default(); m])
        } else {
            Factors::Joint(Chol::default())
        };
        Ok(Self {
            kernel,
            noise_variance,
            observations: Vec::new(),
            unique: Vec::new(),
            counts: Vec::new(),
            sums: Vec::new(),
            lookup: HashMap::new(),
            factors,
            alpha: Vec::new(),
            since_refactor: 0,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Observations in arrival order.
    pub fn observations(&self) -> &[(Vec<f64>, Vec<f64>)] {
        &self.observations
    }

    pub fn n_observations(&self) -> usize {
        self.observations.len()
    }

    /// Number of distinct designs observed so far.
    pub fn n_unique(&self) -> usize {
        self.unique.len()
    }

    /// Appends the observation `y` at design `x`.
    pub fn condition(&mut self, x: &[f64], y: &[f64]) -> Result<(), GpError> {
        self.check_input(x)?;
        if y.len() != self.kernel.output_dim() {
            return Err(GpError::DimensionMismatch { expected: self.kernel.output_dim(), got: y.len() });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(GpError::NonFiniteInput);
        }
        self.observations.push((x.to_vec(), y.to_vec()));
        self.since_refactor += 1;
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        let needs_full = match self.lookup.get(&key) {
            Some(&i) => {
                self.counts[i] += 1;
                for (s, v) in self.sums[i].iter_mut().zip(y) {
                    *s += v;
                }
                // The noise on this row changed, so the factor must be rebuilt.
                true
            }
            None => {
                self.lookup.insert(key, self.unique.len());
                self.unique.push(x.to_vec());
                self.counts.push(1);
                self.sums.push(y.to_vec());
                self.since_refactor >= REFACTOR_EVERY || self.extend_last().is_err()
            }
        };
        if needs_full {
            self.refactor()?;
        }
        self.update_alpha();
        Ok(())
    }

    /// A copy with the Gram matrix factored from scratch.
    pub fn refactored(&self) -> Result<Self, GpError> {
        let mut m = self.clone();
        m.refactor()?;
        m.update_alpha();
        Ok(m)
    }

    fn noise_of(&self, i: usize) -> f64 {
        self.noise_variance / self.counts[i] as f64
    }

    fn mean_obs(&self, i: usize, p: usize) -> f64 {
        self.sums[i][p] / self.counts[i] as f64
    }

    fn refactor(&mut self) -> Result<(), GpError> {
        let u = self.unique.len();
        let m = self.kernel.output_dim();
        let kt: Vec<f64> = (0..u * u)
            .map(|k| self.kernel.design(&self.unique[k / u], &self.unique[k % u]))
            .collect();
        self.factors = match &self.factors {
            Factors::Independent(_) => Factors::Independent(
                (0..m)
                    .map(|p| {
                        let b = self.kernel.output_kernel[p][p];
                        Chol::factor(u, |i, j| {
                            b * kt[i * u + j] + if i == j { self.noise_of(i) } else { 0.0 }
                        })
                    })
                    .collect::<Result<_, _>>()?,
            ),
            Factors::Joint(_) => Factors::Joint(Chol::factor(u * m, |a, b| {
                let (i, p) = (a / m, a % m);
                let (j, q) = (b / m, b % m);
                kt[i * u + j] * self.kernel.output_kernel[p][q]
                    + if a == b { self.noise_of(i) } else { 0.0 }
            })?),
        };
        self.since_refactor = 0;
        Ok(())
    }

    /// Grows the factor by the most recently added distinct design.
    fn extend_last(&mut self) -> Result<(), GpError> {
        let n = self.unique.len() - 1;
        let x = &self.unique[n];
        let kx: Vec<f64> = self.unique[..n].iter().map(|u| self.kernel.design(u, x)).collect();
        let kxx = self.kernel.design(x, x);
        let noise = self.noise_variance / self.counts[n] as f64;
        let b = &self.kernel.output_kernel;
        match &mut self.factors {
            Factors::Independent(fs) => {
                for (p, f) in fs.iter_mut().enumerate() {
                    let cross: Vec<f64> = kx.iter().map(|k| b[p][p] * k).collect();
                    f.append(&cross, b[p][p] * kxx + noise + f.jitter)?;
                }
            }
            Factors::Joint(f) => {
                let m = b.len();
                for p in 0..m {
                    let mut cross = Vec::with_capacity(n * m + p);
                    for k in &kx {
                        cross.extend((0..m).map(|q| k * b[p][q]));
                    }
                    cross.extend((0..p).map(|q| kxx * b[p][q]));
                    f.append(&cross, b[p][p] * kxx + noise + f.jitter)?;
                }
            }
        }
        Ok(())
    }

    fn update_alpha(&mut self) {
        let u = self.unique.len();
        let m = self.kernel.output_dim();
        self.alpha = match &self.factors {
            Factors::Independent(fs) => (0..m)
                .map(|p| fs[p].solve(&(0..u).map(|i| self.mean_obs(i, p)).collect::<Vec<f64>>()))
                .collect(),
            Factors::Joint(f) => {
                let y: Vec<f64> = (0..u * m).map(|a| self.mean_obs(a / m, a % m)).collect();
                vec![f.solve(&y)]
            }
        };
    }

    fn check_input(&self, x: &[f64]) -> Result<(), GpError> {
        if x.len() != self.kernel.input_dim() {
            return Err(GpError::DimensionMismatch { expected: self.kernel.input_dim(), got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(GpError::NonFiniteInput);
        }
        Ok(())
    }

    /// Posterior mean and standard deviation of every output at `x`.
    pub fn posterior(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>), GpError> {
        self.check_input(x)?;
        let m = self.kernel.output_dim();
        let b = &self.kernel.output_kernel;
        let kx: Vec<f64> = self.unique.iter().map(|u| self.kernel.design(u, x)).collect();
        let prior = self.kernel.design(x, x);
        let mut mu = vec![0.0; m];
        let mut sigma = vec![0.0; m];
        if self.unique.is_empty() {
            for p in 0..m {
                sigma[p] = (prior * b[p][p]).sqrt();
            }
            return Ok((mu, sigma));
        }
        match &self.factors {
            Factors::Independent(fs) => {
                for p in 0..m {
                    let kp: Vec<f64> = kx.iter().map(|k| b[p][p] * k).collect();
                    mu[p] = kp.iter().zip(&self.alpha[p]).map(|(a, c)| a * c).sum();
                    let v = fs[p].solve_lower(&kp);
                    let var = prior * b[p][p] - v.iter().map(|t| t * t).sum::<f64>();
                    sigma[p] = var.max(0.0).sqrt();
                }
            }
            Factors::Joint(f) => {
                for p in 0..m {
                    let mut kp = Vec::with_capacity(kx.len() * m);
                    for k in &kx {
                        kp.extend((0..m).map(|q| k * b[p][q]));
                    }
                    mu[p] = kp.iter().zip(&self.alpha[0]).map(|(a, c)| a * c).sum();
                    let v = f.solve_lower(&kp);
                    let var = prior * b[p][p] - v.iter().map(|t| t * t).sum::<f64>();
                    sigma[p] = var.max(0.0).sqrt();
                }
            }
        }
        Ok((mu, sigma))
    }

    /// Posterior mean only; cheaper than [`Self::posterior`].
    pub fn posterior_mean(&self, x: &[f64]) -> Result<Vec<f64>, GpError> {
        self.check_input(x)?;
        let m = self.kernel.output_dim();
        let b = &self.kernel.output_kernel;
        let kx: Vec<f64> = self.unique.iter().map(|u| self.kernel.design(u, x)).collect();
        if self.unique.is_empty() {
            return Ok(vec![0.0; m]);
        }
        Ok(match &self.factors {
            Factors::Independent(_) => (0..m)
                .map(|p| kx.iter().zip(&self.alpha[p]).map(|(k, a)| b[p][p] * k * a).sum())
                .collect(),
            Factors::Joint(_) => (0..m)
                .map(|p| {
                    kx.iter()
                        .enumerate()
                        .map(|(i, k)| (0..m).map(|q| k * b[p][q] * self.alpha[0][i * m + q]).sum::<f64>())
                        .sum()
                })
                .collect(),
        })
    }

    /// Box `mu ± sqrt(beta) * sigma`.
    pub fn confidence_rect(&self, x: &[f64], beta: f64) -> Result<Hyperrectangle, GpError> {
        let (mu, sigma) = self.posterior(x)?;
        let s = beta.max(0.0).sqrt();
        let half: Vec<f64> = sigma.iter().map(|v| s * v).collect();
        Ok(Hyperrectangle::centered(&mu, &half))
    }

    /// `½ ln det(I + σ⁻² K_A)` over every observation so far (repeats included).
    pub fn information_gain(&self) -> f64 {
        let u = self.unique.len();
        if u == 0 {
            return 0.0;
        }
        let m = self.kernel.output_dim() as f64;
        let log_counts: f64 = self.counts.iter().map(|&c| (c as f64).ln()).sum();
        let base = m * (log_counts - u as f64 * self.noise_variance.ln());
        let log_det = match &self.factors {
            Factors::Independent(fs) => fs.iter().map(Chol::log_det).sum::<f64>(),
            Factors::Joint(f) => f.log_det(),
        };
        0.5 * (log_det + base)
    }

    /// Current jitter added to the Gram diagonal (0 when none was needed).
    pub fn jitter(&self) -> f64 {
        match &self.factors {
            Factors::Independent(fs) => fs.iter().map(|f| f.jitter).fold(0.0, f64::max),
            Factors::Joint(f) => f.jitter,
        }
    }

    /// Size of the factored system.
    pub fn factor_dim(&self) -> usize {
        match &self.factors {
            Factors::Independent(fs) => fs.first().map_or(0, Chol::dim),
            Factors::Joint(f) => f.dim(),
        }
    }
}

/// Confidence-width schedule for finite design sets:
/// `β_t = 2 ln(M π² |X| t² / (3δ)) / divisor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaSchedule {
    pub m: usize,
    pub cardinality: usize,
    pub delta: f64,
    pub scale_divisor: f64,
}

impl BetaSchedule {
    pub fn new(m: usize, cardinality: usize, delta: f64, scale_divisor: f64) -> Self {
        Self { m, cardinality, delta, scale_divisor }
    }

    pub fn value(&self, t: usize) -> f64 {
        beta_value(self, t)
    }
}

pub fn beta_value(s: &BetaSchedule, t: usize) -> f64 {
    let t = t.max(1) as f64;
    let arg = s.m as f64 * std::f64::consts::PI.powi(2) * s.cardinality as f64 * t * t / (3.0 * s.delta);
    2.0 * arg.ln() / s.scale_divisor
}
