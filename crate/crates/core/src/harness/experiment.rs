//! Runs a configured experiment over all seeds and writes its records.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, KernelMode, ProblemSource, RunConfig};
use super::dataset::{self, column_means, Dataset};
use super::functions::builtin_objective;
use super::ne::naive_elimination;
use super::HarnessError;
use crate::adadisc::{self, ContinuousOptions, RkhsWidthPolicy, TreeRecord};
use crate::cone::ConeOrder;
use crate::gp::{fit_hyperparameters, BetaSchedule, FitOptions, KernelSpec, SurrogateModel};
use crate::metrics;
use crate::vogp::{self, InvariantReport, RoundRecord, RunStatus, VogpOutcome, VogpParams};

/// Discrepancies below this are reported at this value so that logs stay finite.
pub const HV_FLOOR: f64 = 1e-12;

/// Side length of the pilot grid used to scale continuous objectives.
const PILOT_GRID: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub eps_f1: Option<f64>,
    pub pac_success: Option<bool>,
    pub hv_c_pred: f64,
    pub hv_c_true: f64,
    pub log10_hv_discrepancy: f64,
}

/// Final record of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub terminated: bool,
    /// Design indices (cell ids in continuous mode).
    pub predicted: Vec<usize>,
    pub sample_complexity: usize,
    pub rounds: usize,
    pub coverage_violations: usize,
    pub omega_increases: usize,
    pub nesting_violations: usize,
    pub termination_violations: usize,
    pub metrics: SeedMetrics,
    /// Continuous mode: metrics of the model after the median number of evaluations.
    pub metrics_at_median: Option<SeedMetrics>,
    pub ne_budget: Option<usize>,
    pub wall_time_secs: f64,
}

impl SeedSummary {
    pub fn invariants(&self) -> InvariantReport {
        InvariantReport {
            coverage_violations: self.coverage_violations,
            omega_increases: self.omega_increases,
            nesting_violations: self.nesting_violations,
            termination_violations: self.termination_violations,
        }
    }
}

/// One round line of a seed's record stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLine {
    pub round: usize,
    pub undecided: usize,
    pub predicted: usize,
    pub selected: Option<usize>,
    pub omega_bar: f64,
    pub beta: f64,
    pub discarded: Vec<usize>,
    pub identified: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub active_leaves: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub depth_histogram: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub log10_hv_discrepancy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Record {
    Round(RoundLine),
    Summary(SeedSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub rounds: Vec<RoundLine>,
    pub summary: SeedSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    /// Mean and sample standard deviation.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, std: f64::NAN, n };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std, n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n_seeds: usize,
    pub sample_complexity: Stat,
    pub median_sample_complexity: usize,
    pub eps_f1: Option<Stat>,
    pub pac_success_rate: Option<f64>,
    pub hv_c_pred: Stat,
    pub hv_c_true: Stat,
    pub log10_hv_discrepancy: Stat,
    pub log10_hv_discrepancy_at_median: Option<Stat>,
    pub terminated: usize,
    pub coverage_violations: usize,
    pub invariant_violations: usize,
}

/// Upper median of the sample complexities.
pub fn median_usize(values: &[usize]) -> usize {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.get(v.len() / 2).copied().unwrap_or(0)
}

/// Means and deviations over per-seed summaries.
pub fn aggregate(seeds: &[SeedSummary]) -> Aggregate {
    let col = |f: &dyn Fn(&SeedSummary) -> f64| Stat::of(&seeds.iter().map(f).collect::<Vec<_>>());
    let f1: Vec<f64> = seeds.iter().filter_map(|s| s.metrics.eps_f1).collect();
    let pac: Vec<bool> = seeds.iter().filter_map(|s| s.metrics.pac_success).collect();
    let at_median: Vec<f64> = seeds
        .iter()
        .filter_map(|s| s.metrics_at_median.as_ref().map(|m| m.log10_hv_discrepancy))
        .collect();
    Aggregate {
        n_seeds: seeds.len(),
        sample_complexity: col(&|s| s.sample_complexity as f64),
        median_sample_complexity: median_usize(&seeds.iter().map(|s| s.sample_complexity).collect::<Vec<_>>()),
        eps_f1: (!f1.is_empty()).then(|| Stat::of(&f1)),
        pac_success_rate: (!pac.is_empty())
            .then(|| pac.iter().filter(|&&b| b).count() as f64 / pac.len() as f64),
        hv_c_pred: col(&|s| s.metrics.hv_c_pred),
        hv_c_true: col(&|s| s.metrics.hv_c_true),
        log10_hv_discrepancy: col(&|s| s.metrics.log10_hv_discrepancy),
        log10_hv_discrepancy_at_median: (!at_median.is_empty()).then(|| Stat::of(&at_median)),
        terminated: seeds.iter().filter(|s| s.terminated).count(),
        coverage_violations: seeds.iter().map(|s| s.coverage_violations).sum(),
        invariant_violations: seeds
            .iter()
            .map(|s| s.omega_increases + s.nesting_violations + s.termination_violations)
            .sum(),
    }
}

/// Everything produced by [`run_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub config: RunConfig,
    /// Shared kernel; absent when every seed draws its own problem.
    pub kernel: Option<KernelSpec>,
    pub fit_log_likelihood: Option<f64>,
    pub seeds: Vec<SeedRun>,
    pub aggregate: Aggregate,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub config: RunConfig,
    pub kernel: Option<KernelSpec>,
    pub fit_log_likelihood: Option<f64>,
    pub aggregate: Aggregate,
}

fn hv_or_zero(front: &[Vec<f64>], cone: &ConeOrder, reference: &[f64]) -> Result<f64, HarnessError> {
    if front.is_empty() {
        return Ok(0.0);
    }
    Ok(metrics::cone_hypervolume(front, cone, reference)?)
}

fn log_discrepancy(a: f64, b: f64) -> f64 {
    (a - b).abs().max(HV_FLOOR).log10()
}

fn noise(rng: &mut ChaCha8Rng, sd: f64, m: usize) -> impl Iterator<Item = f64> + '_ {
    (0..m).map(move |_| sd * rng.sample::<f64, _>(StandardNormal))
}

fn explicit_kernel(cfg: &RunConfig, d: usize, m: usize) -> Result<KernelSpec, HarnessError> {
    let ls = cfg.lengthscales.clone().unwrap_or_default();
    let ls = if ls.len() == 1 { vec![ls[0]; d] } else { ls };
    let vars = cfg.output_variances.clone().unwrap_or_else(|| vec![1.0; m]);
    if vars.len() != m {
        return Err(HarnessError::DimensionMismatch { expected: m, got: vars.len() });
    }
    let mut b = vec![vec![0.0; m]; m];
    for p in 0..m {
        b[p][p] = vars[p];
    }
    Ok(KernelSpec::new(ls, 1.0, b)?)
}

fn centered(rows: &[Vec<f64>], center: &[f64]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| r.iter().zip(center).map(|(a, c)| a - c).collect()).collect()
}

fn params_of(cfg: &RunConfig) -> VogpParams {
    VogpParams { epsilon: cfg.epsilon, delta: cfg.delta, noise_std: cfg.noise_std, max_rounds: cfg.max_rounds }
}

/// Runs every seed of the configured experiment.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    match cfg.source() {
        ProblemSource::Builtin(name) if cfg.algorithm == Algorithm::VogpContinuous => run_continuous_experiment(cfg, &name),
        ProblemSource::GpSample => {
            let d = cfg.lengthscales.as_ref().map_or(2, |l| l.len().max(2));
            let m = cfg.output_variances.as_ref().map_or(2, Vec::len);
            let cone = cfg.resolve_cone(m)?;
            let kernel = explicit_kernel(cfg, d, m)?;
            let seeds: Vec<SeedRun> = cfg
                .seeds
                .par_iter()
                .map(|&seed| {
                    let ds = dataset::gp_sample_dataset(cfg.dataset_size, &kernel, seed)?;
                    // The prior has mean zero, so the sample is used as is.
                    let center = vec![0.0; m];
                    run_discrete_seed(cfg, &ds, &center, &kernel, &cone, seed)
                })
                .collect::<Result<_, _>>()?;
            let aggregate = aggregate(&seeds.iter().map(|s| s.summary.clone()).collect::<Vec<_>>());
            Ok(ExperimentResult { config: cfg.clone(), kernel: Some(kernel), fit_log_likelihood: None, seeds, aggregate })
        }
        source => {
            let ds = match source {
                ProblemSource::Csv(path) => dataset::load_dataset_csv(&path)?,
                _ => dataset::branin_currin_dataset(cfg.dataset_size, cfg.dataset_seed)?,
            };
            let cone = cfg.resolve_cone(ds.objective_dim())?;
            let center = ds.objective_means();
            let (kernel, ll) = match cfg.kernel {
                KernelMode::Explicit => (explicit_kernel(cfg, ds.design_dim(), ds.objective_dim())?, None),
                KernelMode::Fit => {
                    let opts = FitOptions { seed: cfg.fit_seed, ..FitOptions::default() };
                    let ys = centered(&ds.objectives, &center);
                    let rep = fit_hyperparameters(&ds.designs, &ys, cfg.noise_std.powi(2), &opts)?;
                    (rep.kernel, Some(rep.log_likelihood))
                }
            };
            log::info!("kernel: lengthscales {:?}, output kernel {:?}", kernel.lengthscales, kernel.output_kernel);
            let seeds: Vec<SeedRun> = cfg
                .seeds
                .par_iter()
                .map(|&seed| run_discrete_seed(cfg, &ds, &center, &kernel, &cone, seed))
                .collect::<Result<_, _>>()?;
            let aggregate = aggregate(&seeds.iter().map(|s| s.summary.clone()).collect::<Vec<_>>());
            Ok(ExperimentResult { config: cfg.clone(), kernel: Some(kernel), fit_log_likelihood: ll, seeds, aggregate })
        }
    }
}

/// Runs the discrete algorithm once on a dataset with observation noise
/// drawn from `seed`.
pub fn run_vogp_on_dataset(
    ds: &Dataset,
    center: &[f64],
    kernel: &KernelSpec,
    cone: &ConeOrder,
    params: &VogpParams,
    beta_scale_divisor: f64,
    seed: u64,
) -> Result<VogpOutcome, HarnessError> {
    let m = cone.dim();
    let mut model = SurrogateModel::new(kernel.clone(), params.noise_std.powi(2))?;
    let schedule = BetaSchedule::new(m, ds.len(), params.delta, beta_scale_divisor);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = params.noise_std;
    let oracle = |i: usize, _: &[f64]| -> Vec<f64> {
        let f = &ds.objectives[i];
        let e: Vec<f64> = noise(&mut rng, sd, m).collect();
        f.iter().zip(center).zip(e).map(|((v, c), n)| v - c + n).collect()
    };
    Ok(vogp::run(&ds.designs, &mut model, cone, params, &schedule, oracle)?)
}

fn discrete_metrics(
    cfg: &RunConfig,
    ds: &Dataset,
    cone: &ConeOrder,
    predicted: &[usize],
) -> Result<(SeedMetrics, Vec<f64>), HarnessError> {
    let eval = metrics::evaluate_front(&ds.objectives, cone, predicted, cfg.epsilon)?;
    let truth: Vec<Vec<f64>> = eval.true_pareto.iter().map(|&i| ds.objectives[i].clone()).collect();
    let pred: Vec<Vec<f64>> = eval.predicted.iter().map(|&i| ds.objectives[i].clone()).collect();
    let reference = match &cfg.reference {
        Some(r) => r.clone(),
        None => metrics::default_reference(&truth.iter().chain(&pred).cloned().collect::<Vec<_>>(), cone)?,
    };
    let hv_c_true = hv_or_zero(&truth, cone, &reference)?;
    let hv_c_pred = hv_or_zero(&pred, cone, &reference)?;
    let m = SeedMetrics {
        eps_f1: Some(eval.eps_f1),
        pac_success: Some(eval.pac_success),
        hv_c_pred,
        hv_c_true,
        log10_hv_discrepancy: log_discrepancy(hv_c_pred, hv_c_true),
    };
    Ok((m, reference))
}

fn round_line(r: &RoundRecord) -> RoundLine {
    RoundLine {
        round: r.round,
        undecided: r.undecided,
        predicted: r.predicted,
        selected: r.selected,
        omega_bar: r.omega_bar,
        beta: r.beta,
        discarded: r.discarded.clone(),
        identified: r.identified.clone(),
        active_leaves: None,
        depth_histogram: None,
        log10_hv_discrepancy: None,
    }
}

fn run_discrete_seed(
    cfg: &RunConfig,
    ds: &Dataset,
    center: &[f64],
    kernel: &KernelSpec,
    cone: &ConeOrder,
    seed: u64,
) -> Result<SeedRun, HarnessError> {
    let params = params_of(cfg);
    match cfg.algorithm {
        Algorithm::Vogp => {
            let out = run_vogp_on_dataset(ds, center, kernel, cone, &params, cfg.beta_scale_divisor, seed)?;
            let (metrics, reference) = discrete_metrics(cfg, ds, cone, &out.predicted)?;
            let hv_true = metrics.hv_c_true;
            // Running discrepancy of P_t, recomputed only when P_t grows.
            let mut current: Vec<Vec<f64>> = Vec::new();
            let mut hv_now = hv_or_zero(&current, cone, &reference)?;
            let mut rounds = Vec::with_capacity(out.rounds.len());
            for r in &out.rounds {
                if !r.identified.is_empty() {
                    current.extend(r.identified.iter().map(|&i| ds.objectives[i].clone()));
                    hv_now = hv_or_zero(&current, cone, &reference)?;
                }
                let mut line = round_line(r);
                line.log10_hv_discrepancy = Some(log_discrepancy(hv_now, hv_true));
                rounds.push(line);
            }
            let summary = summary_of(seed, cfg.algorithm, &out, out.predicted.clone(), metrics, None, None);
            Ok(SeedRun { rounds, summary })
        }
        Algorithm::Ne => {
            let budget = match cfg.ne_budget {
                Some(l) => l,
                None => {
                    let out = run_vogp_on_dataset(ds, center, kernel, cone, &params, cfg.beta_scale_divisor, seed)?;
                    out.sample_complexity().div_ceil(ds.len()).max(1)
                }
            };
            let started = std::time::Instant::now();
            let out = naive_elimination(ds, cone, budget, cfg.noise_std, seed)?;
            let (metrics, _) = discrete_metrics(cfg, ds, cone, &out.predicted)?;
            let summary = SeedSummary {
                seed,
                algorithm: Algorithm::Ne,
                terminated: true,
                predicted: out.predicted,
                sample_complexity: out.total_queries,
                rounds: 0,
                coverage_violations: 0,
                omega_increases: 0,
                nesting_violations: 0,
                termination_violations: 0,
                metrics,
                metrics_at_median: None,
                ne_budget: Some(budget),
                wall_time_secs: started.elapsed().as_secs_f64(),
            };
            Ok(SeedRun { rounds: Vec::new(), summary })
        }
        Algorithm::VogpContinuous => Err(HarnessError::InvalidConfig("continuous runs need a builtin function".into())),
    }
}

fn summary_of(
    seed: u64,
    algorithm: Algorithm,
    out: &VogpOutcome,
    predicted: Vec<usize>,
    metrics: SeedMetrics,
    metrics_at_median: Option<SeedMetrics>,
    ne_budget: Option<usize>,
) -> SeedSummary {
    SeedSummary {
        seed,
        algorithm,
        terminated: out.status == RunStatus::Terminated,
        predicted,
        sample_complexity: out.sample_complexity(),
        rounds: out.rounds.len(),
        coverage_violations: out.invariants.coverage_violations,
        omega_increases: out.invariants.omega_increases,
        nesting_violations: out.invariants.nesting_violations,
        termination_violations: out.invariants.termination_violations,
        metrics,
        metrics_at_median,
        ne_budget,
        wall_time_secs: out.wall_time_secs,
    }
}

/// A continuous builtin problem with objectives min-max scaled over a pilot grid.
#[derive(Debug, Clone)]
pub struct ContinuousProblem {
    pub name: String,
    pub dim: usize,
    pub lows: Vec<f64>,
    pub highs: Vec<f64>,
    /// Mean of the scaled objectives over the pilot grid.
    pub center: Vec<f64>,
    pub pilot: Vec<Vec<f64>>,
    pub pilot_values: Vec<Vec<f64>>,
}

impl ContinuousProblem {
    pub fn new(name: &str) -> Result<Self, HarnessError> {
        let dim = super::functions::builtin_dim(name)?;
        let pilot = adadisc::unit_grid(dim, PILOT_GRID)?;
        let raw: Vec<Vec<f64>> = pilot.iter().map(|x| builtin_objective(name, x)).collect::<Result<_, _>>()?;
        let m = raw[0].len();
        let lows: Vec<f64> = (0..m).map(|j| raw.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min)).collect();
        let highs: Vec<f64> = (0..m).map(|j| raw.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
        let mut problem = Self { name: name.to_string(), dim, lows, highs, center: Vec::new(), pilot, pilot_values: Vec::new() };
        problem.pilot_values = raw.iter().map(|r| problem.scale(r)).collect();
        problem.center = column_means(&problem.pilot_values);
        Ok(problem)
    }

    fn scale(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.lows.iter().zip(&self.highs))
            .map(|(v, (lo, hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect()
    }

    /// Scaled noiseless objective at `x`.
    pub fn value(&self, x: &[f64]) -> Result<Vec<f64>, HarnessError> {
        Ok(self.scale(&builtin_objective(&self.name, x)?))
    }

    pub fn objective_dim(&self) -> usize {
        self.lows.len()
    }
}

/// Ground truth for hypervolume evaluation on a grid.
struct GridTruth {
    front: Vec<Vec<f64>>,
    reference: Vec<f64>,
    hv: f64,
}

fn grid_truth(cfg: &RunConfig, problem: &ContinuousProblem, cone: &ConeOrder) -> Result<GridTruth, HarnessError> {
    let grid = adadisc::unit_grid(problem.dim, cfg.grid_per_dim)?;
    let values: Vec<Vec<f64>> = grid.iter().map(|x| problem.value(x)).collect::<Result<_, _>>()?;
    let front: Vec<Vec<f64>> = metrics::true_pareto_front(&values, cone)?.into_iter().map(|i| values[i].clone()).collect();
    let reference = match &cfg.reference {
        Some(r) => r.clone(),
        None => metrics::default_reference(&values, cone)?,
    };
    let hv = metrics::cone_hypervolume(&front, cone, &reference)?;
    Ok(GridTruth { front, reference, hv })
}

/// Hypervolume metrics of the dense posterior-mean front of `model`.
fn dense_metrics(
    cfg: &RunConfig,
    problem: &ContinuousProblem,
    cone: &ConeOrder,
    truth: &GridTruth,
    model: &SurrogateModel,
) -> Result<SeedMetrics, HarnessError> {
    let dense = adadisc::extract_dense_pareto(model, problem.dim, cone, cfg.grid_per_dim)?;
    let values: Vec<Vec<f64>> = dense.designs.iter().map(|x| problem.value(x)).collect::<Result<_, _>>()?;
    let hv_c_pred = hv_or_zero(&values, cone, &truth.reference)?;
    debug_assert!(!truth.front.is_empty());
    Ok(SeedMetrics {
        eps_f1: None,
        pac_success: None,
        hv_c_pred,
        hv_c_true: truth.hv,
        log10_hv_discrepancy: log_discrepancy(hv_c_pred, truth.hv),
    })
}

/// Kernel for a continuous problem: explicit, or fitted on the pilot grid.
pub fn continuous_kernel(cfg: &RunConfig, problem: &ContinuousProblem) -> Result<(KernelSpec, Option<f64>), HarnessError> {
    match cfg.kernel {
        KernelMode::Explicit => Ok((explicit_kernel(cfg, problem.dim, problem.objective_dim())?, None)),
        KernelMode::Fit => {
            let opts = FitOptions { seed: cfg.fit_seed, ..FitOptions::default() };
            let ys = centered(&problem.pilot_values, &problem.center);
            let rep = fit_hyperparameters(&problem.pilot, &ys, cfg.noise_std.powi(2), &opts)?;
            Ok((rep.kernel, Some(rep.log_likelihood)))
        }
    }
}

fn run_continuous_experiment(cfg: &RunConfig, name: &str) -> Result<ExperimentResult, HarnessError> {
    let problem = ContinuousProblem::new(name)?;
    let cone = cfg.resolve_cone(problem.objective_dim())?;
    let (kernel, ll) = continuous_kernel(cfg, &problem)?;
    log::info!("kernel: lengthscales {:?}, output kernel {:?}", kernel.lengthscales, kernel.output_kernel);
    let truth = grid_truth(cfg, &problem, &cone)?;
    let params = params_of(cfg);
    let policy = RkhsWidthPolicy { rkhs_bound: cfg.rkhs_bound, delta: cfg.delta, scale_divisor: cfg.beta_scale_divisor };
    let opts = ContinuousOptions { max_depth: cfg.max_depth, split_factor: cfg.split_factor, initial_depth: cfg.initial_depth };
    let m = problem.objective_dim();

    let runs: Vec<adadisc::ContinuousOutcome> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut model = SurrogateModel::new(kernel.clone(), cfg.noise_std.powi(2))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let oracle = |x: &[f64]| -> Vec<f64> {
                let f = problem.value(x).expect("cell centers lie in the unit cube");
                let e: Vec<f64> = noise(&mut rng, cfg.noise_std, m).collect();
                f.iter().zip(&problem.center).zip(e).map(|((v, c), n)| v - c + n).collect()
            };
            Ok(adadisc::run_continuous(problem.dim, &mut model, &cone, &params, &policy, &opts, oracle)?)
        })
        .collect::<Result<_, HarnessError>>()?;

    let median = median_usize(&runs.iter().map(|r| r.outcome.sample_complexity()).collect::<Vec<_>>());
    let seeds: Vec<SeedRun> = cfg
        .seeds
        .par_iter()
        .zip(&runs)
        .map(|(&seed, run)| replay_continuous(cfg, &problem, &cone, &kernel, &truth, run, median, seed))
        .collect::<Result<_, _>>()?;
    let aggregate = aggregate(&seeds.iter().map(|s| s.summary.clone()).collect::<Vec<_>>());
    Ok(ExperimentResult { config: cfg.clone(), kernel: Some(kernel), fit_log_likelihood: ll, seeds, aggregate })
}

/// Rebuilds the model along the query log to evaluate running and
/// median-budget hypervolume discrepancies.
#[allow(clippy::too_many_arguments)]
fn replay_continuous(
    cfg: &RunConfig,
    problem: &ContinuousProblem,
    cone: &ConeOrder,
    kernel: &KernelSpec,
    truth: &GridTruth,
    run: &adadisc::ContinuousOutcome,
    median: usize,
    seed: u64,
) -> Result<SeedRun, HarnessError> {
    let out = &run.outcome;
    let mut model = SurrogateModel::new(kernel.clone(), cfg.noise_std.powi(2))?;
    let mut applied = 0;
    let budget = median.min(out.sample_complexity());
    let mut at_median = None;
    let mut rounds = Vec::with_capacity(out.rounds.len());
    let centers: Vec<Vec<f64>> = run.design_cells.iter().map(|&c| run.tree.cell(c).center()).collect();
    if budget == 0 {
        at_median = Some(dense_metrics(cfg, problem, cone, truth, &model)?);
    }
    for (r, tree) in out.rounds.iter().zip(&run.tree_records) {
        // The query of round `r` is part of the model from round `r` on.
        while applied < out.queries.len() && out.queries[applied].round <= r.round {
            let q = &out.queries[applied];
            model.condition(&centers[q.design], &q.observation)?;
            applied += 1;
            if applied == budget {
                at_median = Some(dense_metrics(cfg, problem, cone, truth, &model)?);
            }
        }
        let TreeRecord { active_leaves, depth_histogram, .. } = tree;
        let mut line = round_line(r);
        line.active_leaves = Some(*active_leaves);
        line.depth_histogram = Some(depth_histogram.clone());
        if cfg.curve_stride > 0 && r.round % cfg.curve_stride == 0 {
            line.log10_hv_discrepancy = Some(dense_metrics(cfg, problem, cone, truth, &model)?.log10_hv_discrepancy);
        }
        rounds.push(line);
    }
    let final_metrics = dense_metrics(cfg, problem, cone, truth, &model)?;
    if let Some(last) = rounds.last_mut() {
        last.log10_hv_discrepancy = Some(final_metrics.log10_hv_discrepancy);
    }
    let summary = summary_of(
        seed,
        Algorithm::VogpContinuous,
        out,
        run.predicted_cells.clone(),
        final_metrics,
        at_median,
        None,
    );
    Ok(SeedRun { rounds, summary })
}

/// Writes `seed_<k>.jsonl`, `summary.json` and `curves.csv` into `outdir`.
pub fn write_outputs(result: &ExperimentResult, outdir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(outdir)?;
    for run in &result.seeds {
        let path = outdir.join(format!("seed_{}.jsonl", run.summary.seed));
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for r in &run.rounds {
            serde_json::to_writer(&mut f, &Record::Round(r.clone()))?;
            f.write_all(b"\n")?;
        }
        serde_json::to_writer(&mut f, &Record::Summary(run.summary.clone()))?;
        f.write_all(b"\n")?;
        f.flush()?;
    }
    let summary = SummaryFile {
        config: result.config.clone(),
        kernel: result.kernel.clone(),
        fit_log_likelihood: result.fit_log_likelihood,
        aggregate: result.aggregate.clone(),
    };
    std::fs::write(outdir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    let mut w = csv::Writer::from_path(outdir.join("curves.csv")).map_err(|e| HarnessError::Csv(e.to_string()))?;
    w.write_record(["seed", "round", "omega_bar", "undecided", "predicted", "log10_hv_discrepancy"])
        .map_err(|e| HarnessError::Csv(e.to_string()))?;
    for run in &result.seeds {
        for r in &run.rounds {
            w.write_record([
                run.summary.seed.to_string(),
                r.round.to_string(),
                r.omega_bar.to_string(),
                r.undecided.to_string(),
                r.predicted.to_string(),
                r.log10_hv_discrepancy.map(|v| v.to_string()).unwrap_or_default(),
            ])
            .map_err(|e| HarnessError::Csv(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads one seed's record stream.
pub fn read_records(path: &Path) -> Result<SeedRun, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    let mut rounds = Vec::new();
    let mut summary = None;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        match serde_json::from_str::<Record>(line)? {
            Record::Round(r) => rounds.push(r),
            Record::Summary(s) => {
                if summary.replace(s).is_some() {
                    return Err(HarnessError::InvalidRecords(format!("{}: second summary at line {}", path.display(), i + 1)));
                }
            }
        }
    }
    let summary = summary.ok_or_else(|| HarnessError::InvalidRecords(format!("{}: no summary line", path.display())))?;
    Ok(SeedRun { rounds, summary })
}

/// Loads every `seed_*.jsonl` under `path` (or the single file `path`),
/// ordered by seed.
pub fn load_records(path: &Path) -> Result<Vec<SeedRun>, HarnessError> {
    let mut runs = if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("seed_") && n.ends_with(".jsonl"))
            })
            .collect();
        files.sort();
        files.iter().map(|p| read_records(p)).collect::<Result<Vec<_>, _>>()?
    } else {
        vec![read_records(path)?]
    };
    if runs.is_empty() {
        return Err(HarnessError::InvalidRecords(format!("no seed records in {}", path.display())));
    }
    runs.sort_by_key(|r| r.summary.seed);
    Ok(runs)
}

/// Checks that per-seed round counts agree with the round lines and, when
/// given, that a stored aggregate matches the one recomputed from the records.
pub fn check_consistency(runs: &[SeedRun], stored: Option<&Aggregate>) -> Result<Aggregate, HarnessError> {
    for r in runs {
        if r.summary.algorithm != Algorithm::Ne && r.rounds.len() != r.summary.rounds {
            return Err(HarnessError::InvalidRecords(format!(
                "seed {}: {} round lines but summary says {}",
                r.summary.seed,
                r.rounds.len(),
                r.summary.rounds
            )));
        }
    }
    let agg = aggregate(&runs.iter().map(|r| r.summary.clone()).collect::<Vec<_>>());
    if let Some(s) = stored {
        let close = |a: f64, b: f64| (a.is_nan() && b.is_nan()) || (a - b).abs() <= 1e-9 * (1.0 + a.abs());
        let same = s.n_seeds == agg.n_seeds
            && close(s.sample_complexity.mean, agg.sample_complexity.mean)
            && close(s.log10_hv_discrepancy.mean, agg.log10_hv_discrepancy.mean)
            && s.eps_f1.map(|v| v.mean).zip(agg.eps_f1.map(|v| v.mean)).is_none_or(|(a, b)| close(a, b))
            && s.pac_success_rate == agg.pac_success_rate;
        if !same {
            return Err(HarnessError::InvalidRecords("stored summary does not match the seed records".into()));
        }
    }
    Ok(agg)
}
