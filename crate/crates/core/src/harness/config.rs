//! Flat key-value run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::functions::builtin_dim;
use super::HarnessError;
use crate::cone::ConeOrder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Vogp,
    Ne,
    VogpContinuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMode {
    /// Maximum-likelihood fit before the run.
    Fit,
    /// `lengthscales` and `output_variances` from the config.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `BC`, `BCC`, `ZDT3`, `GP` (a fresh prior sample per seed) or a CSV path.
    pub problem: String,
    /// `acute`, `right`, `obtuse`, `theta:<degrees>` or a cone file path.
    pub cone: String,
    pub epsilon: f64,
    pub delta: f64,
    pub noise_std: f64,
    /// 1 gives the unscaled confidence multiplier.
    pub beta_scale_divisor: f64,
    pub seeds: Vec<u64>,
    pub algorithm: Algorithm,
    pub max_rounds: usize,
    pub kernel: KernelMode,
    pub lengthscales: Option<Vec<f64>>,
    pub output_variances: Option<Vec<f64>>,
    pub grid_per_dim: usize,
    pub reference: Option<Vec<f64>>,
    pub outdir: PathBuf,
    /// Size and seed of generated design sets (`BC`, `GP`).
    pub dataset_size: usize,
    pub dataset_seed: u64,
    /// Per-design budget for `ne`; when absent it is `ceil(T / |X|)` with
    /// `T` the sample complexity of a vogp run on the same seed.
    pub ne_budget: Option<usize>,
    pub max_depth: usize,
    pub split_factor: f64,
    pub initial_depth: usize,
    pub rkhs_bound: f64,
    pub fit_seed: u64,
    /// Rounds between running hypervolume evaluations in continuous mode.
    pub curve_stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "BC".into(),
            cone: "right".into(),
            epsilon: 0.1,
            delta: 0.05,
            noise_std: 0.1,
            beta_scale_divisor: 32.0,
            seeds: (0..10).collect(),
            algorithm: Algorithm::Vogp,
            max_rounds: 10_000,
            kernel: KernelMode::Fit,
            lengthscales: None,
            output_variances: None,
            grid_per_dim: 100,
            reference: None,
            outdir: PathBuf::from("runs"),
            dataset_size: 500,
            dataset_seed: 0,
            ne_budget: None,
            max_depth: 5,
            split_factor: 1.0,
            initial_depth: 0,
            rkhs_bound: 0.1,
            fit_seed: 0,
            curve_stride: 10,
        }
    }
}

/// Where the objective values come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Builtin(String),
    GpSample,
    Csv(PathBuf),
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.outdir.is_relative() {
            cfg.outdir = base.join(&cfg.outdir);
        }
        if let ProblemSource::Csv(p) = cfg.source() {
            if p.is_relative() {
                cfg.problem = base.join(p).to_string_lossy().into_owned();
            }
        }
        if !is_inline_cone(&cfg.cone) && Path::new(&cfg.cone).is_relative() {
            cfg.cone = base.join(&cfg.cone).to_string_lossy().into_owned();
        }
        Ok(cfg)
    }

    pub fn source(&self) -> ProblemSource {
        match self.problem.as_str() {
            "BC" | "BCC" | "ZDT3" => ProblemSource::Builtin(self.problem.clone()),
            "GP" => ProblemSource::GpSample,
            p => ProblemSource::Csv(PathBuf::from(p)),
        }
    }

    /// Checks ranges and option combinations.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidConfig(m.to_string()));
        if !(self.epsilon >= 0.0) {
            return bad("epsilon must be nonnegative");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if !(self.noise_std > 0.0) {
            return bad("noise_std must be positive");
        }
        if !(self.beta_scale_divisor > 0.0) {
            return bad("beta_scale_divisor must be positive");
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty");
        }
        if self.grid_per_dim == 0 {
            return bad("grid_per_dim must be positive");
        }
        if self.initial_depth > self.max_depth {
            return bad("initial_depth exceeds max_depth");
        }
        if !(self.split_factor > 0.0) {
            return bad("split_factor must be positive");
        }
        if self.ne_budget == Some(0) {
            return bad("ne_budget must be at least 1");
        }
        let source = self.source();
        let continuous = self.algorithm == Algorithm::VogpContinuous;
        match &source {
            ProblemSource::Builtin(name) if name == "BC" && continuous => {
                return bad("BC is a finite design set; use BCC for continuous runs")
            }
            ProblemSource::Builtin(name) if name != "BC" && !continuous => {
                return bad("BCC and ZDT3 are continuous problems; use algorithm = \"vogp-continuous\"")
            }
            ProblemSource::GpSample | ProblemSource::Csv(_) if continuous => {
                return bad("continuous runs need a builtin function")
            }
            _ => {}
        }
        if self.kernel == KernelMode::Explicit || source == ProblemSource::GpSample {
            if self.lengthscales.is_none() {
                return bad("explicit kernels need lengthscales");
            }
        }
        Ok(())
    }

    /// Builds the ordering cone for `m` objectives.
    pub fn resolve_cone(&self, m: usize) -> Result<ConeOrder, HarnessError> {
        let cone = match self.cone.as_str() {
            name @ ("acute" | "right" | "obtuse") => ConeOrder::builtin(name, m)?,
            spec if spec.starts_with("theta:") => ConeOrder::parse_spec(spec)?,
            path => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| HarnessError::InvalidConfig(format!("cone file {path}: {e}")))?;
                ConeOrder::parse_spec(&text)?
            }
        };
        if cone.dim() != m {
            return Err(HarnessError::DimensionMismatch { expected: m, got: cone.dim() });
        }
        Ok(cone)
    }

    /// Input dimension for builtin problems.
    pub fn builtin_dim(&self) -> Result<Option<usize>, HarnessError> {
        match self.source() {
            ProblemSource::Builtin(name) => Ok(Some(builtin_dim(&name)?)),
            _ => Ok(None),
        }
    }
}

fn is_inline_cone(spec: &str) -> bool {
    matches!(spec, "acute" | "right" | "obtuse") || spec.starts_with("theta:")
}
