//! The VOGP elimination loop.
//!
//! Every round runs four phases over the designs that are still in play:
//! modeling (shrink each cumulative confidence rectangle), discarding (drop
//! designs that are confidently dominated by a pessimistic Pareto member),
//! Pareto identification (promote designs that nothing can ε-dominate), and
//! evaluating (query the design with the widest rectangle).
//!
//! The phases are public so that the continuous-domain variant can interleave
//! its own tree refinement with them.

mod bound;
mod checks;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cone::ConeOrder;
use crate::convex::{ConvexError, Hyperrectangle};
use crate::gp::{BetaSchedule, GpError, SurrogateModel};

pub use bound::theoretical_sample_bound;
pub use checks::{discard_check, epsilon_cover_check, pessimistic_pareto};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VogpError {
    #[error("empty design set")]
    EmptyInput,
    #[error("no design available for evaluation")]
    EmptySet,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no sample bound below {0}")]
    NotFound(usize),
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    Gp(#[from] GpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VogpParams {
    pub epsilon: f64,
    pub delta: f64,
    pub noise_std: f64,
    /// Safety cap on the number of rounds.
    pub max_rounds: usize,
}

impl VogpParams {
    pub fn validate(&self) -> Result<(), VogpError> {
        if !(self.epsilon >= 0.0) {
            return Err(VogpError::InvalidParams("epsilon must be nonnegative".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(VogpError::InvalidParams("delta must lie in (0, 1)".into()));
        }
        if !(self.noise_std > 0.0) {
            return Err(VogpError::InvalidParams("noise_std must be positive".into()));
        }
        Ok(())
    }
}

impl Default for VogpParams {
    fn default() -> Self {
        Self { epsilon: 0.1, delta: 0.05, noise_std: 0.1, max_rounds: 10_000 }
    }
}

/// Confidence multiplier `β_t` used to build the rectangles.
pub trait WidthPolicy: Sync {
    fn beta(&self, t: usize, model: &SurrogateModel) -> f64;
}

impl WidthPolicy for BetaSchedule {
    fn beta(&self, t: usize, _model: &SurrogateModel) -> f64 {
        self.value(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Undecided,
    Pareto,
    Discarded,
    /// Removed without a decision (a refined cell).
    Retired,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub undecided: usize,
    pub predicted: usize,
    pub selected: Option<usize>,
    pub omega_bar: f64,
    pub beta: f64,
    pub discarded: Vec<usize>,
    pub identified: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Query {
    pub round: usize,
    pub design: usize,
    pub observation: Vec<f64>,
}

/// Counters for the invariants checked while running.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    /// Rectangle intersections that came out empty in some coordinate.
    pub coverage_violations: usize,
    /// Rounds where `ω̄_t` exceeded the previous round's value. Designs added
    /// during the round are left out of the comparison.
    pub omega_increases: usize,
    /// Rectangles that grew outside a coverage violation.
    pub nesting_violations: usize,
    /// Rounds with `ω̄_t < ε / d_C` that still ended with undecided designs.
    pub termination_violations: usize,
}

impl InvariantReport {
    /// True when nothing went wrong outside logged coverage events.
    pub fn clean(&self) -> bool {
        self.omega_increases == 0 && self.nesting_violations == 0 && self.termination_violations == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Terminated,
    MaxRoundsExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VogpOutcome {
    pub predicted: Vec<usize>,
    pub status: RunStatus,
    pub rounds: Vec<RoundRecord>,
    pub queries: Vec<Query>,
    pub invariants: InvariantReport,
    pub wall_time_secs: f64,
}

impl VogpOutcome {
    /// Number of function evaluations.
    pub fn sample_complexity(&self) -> usize {
        self.queries.len()
    }
}

/// Round state of one run.
#[derive(Debug, Clone)]
pub struct AlgState {
    round: usize,
    designs: Vec<Vec<f64>>,
    status: Vec<Status>,
    /// Cumulative rectangles; `None` once a design leaves play.
    rects: Vec<Option<Hyperrectangle>>,
    /// Round in which each design entered (0 for the initial set).
    born: Vec<usize>,
    queries: Vec<Query>,
    rounds: Vec<RoundRecord>,
    report: InvariantReport,
    last_omega_bar: Option<f64>,
    /// Pending per-round bookkeeping.
    beta: f64,
    discarded_now: Vec<usize>,
    omega_now: f64,
}

impl AlgState {
    pub fn new(designs: Vec<Vec<f64>>, m: usize) -> Self {
        let n = designs.len();
        Self {
            round: 1,
            designs,
            status: vec![Status::Undecided; n],
            rects: vec![Some(Hyperrectangle::whole_space(m)); n],
            born: vec![0; n],
            queries: Vec::new(),
            rounds: Vec::new(),
            report: InvariantReport::default(),
            last_omega_bar: None,
            beta: 0.0,
            discarded_now: Vec::new(),
            omega_now: f64::INFINITY,
        }
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn designs(&self) -> &[Vec<f64>] {
        &self.designs
    }

    pub fn status(&self, i: usize) -> Status {
        self.status[i]
    }

    pub fn rect(&self, i: usize) -> Option<&Hyperrectangle> {
        self.rects[i].as_ref()
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn rounds(&self) -> &[RoundRecord] {
        &self.rounds
    }

    pub fn invariants(&self) -> InvariantReport {
        self.report
    }

    fn with_status(&self, s: Status) -> Vec<usize> {
        (0..self.status.len()).filter(|&i| self.status[i] == s).collect()
    }

    /// `S_t`.
    pub fn undecided(&self) -> Vec<usize> {
        self.with_status(Status::Undecided)
    }

    /// `P_t`.
    pub fn predicted(&self) -> Vec<usize> {
        self.with_status(Status::Pareto)
    }

    /// `S_t ∪ P_t`, in index order.
    pub fn active(&self) -> Vec<usize> {
        (0..self.status.len())
            .filter(|&i| matches!(self.status[i], Status::Undecided | Status::Pareto))
            .collect()
    }

    /// Adds an undecided design with an unconstrained rectangle.
    pub fn add_design(&mut self, x: Vec<f64>, m: usize) -> usize {
        self.designs.push(x);
        self.status.push(Status::Undecided);
        self.rects.push(Some(Hyperrectangle::whole_space(m)));
        self.born.push(self.round);
        self.designs.len() - 1
    }

    /// Removes an undecided design from play without a decision.
    pub fn retire(&mut self, i: usize) {
        debug_assert_eq!(self.status[i], Status::Undecided);
        self.status[i] = Status::Retired;
        self.rects[i] = None;
    }

    /// Modeling: intersect `R_{t-1}(x)` with `Q_t(x)` for the given designs.
    pub fn model_designs(&mut self, ids: &[usize], model: &SurrogateModel, beta: f64) -> Result<(), VogpError> {
        let qs: Vec<Result<Hyperrectangle, GpError>> = ids
            .par_iter()
            .map(|&i| model.confidence_rect(&self.designs[i], beta))
            .collect();
        for (&i, q) in ids.iter().zip(qs) {
            let q = q?;
            let rect = self.rects[i].as_mut().expect("active design has a rectangle");
            let old = rect.clone();
            let crossed = rect.intersect_collapsing(&q);
            if !crossed.is_empty() {
                self.report.coverage_violations += 1;
                log::debug!("design {i}: empty confidence intersection in {crossed:?}");
            }
            let grew = (0..old.dim())
                .filter(|j| !crossed.contains(j))
                .any(|j| rect.lower()[j] < old.lower()[j] || rect.upper()[j] > old.upper()[j]);
            if grew {
                self.report.nesting_violations += 1;
            }
        }
        Ok(())
    }

    /// Modeling phase over `A_t = S_t ∪ P_t`.
    pub fn model_phase(&mut self, model: &SurrogateModel, beta: f64) -> Result<(), VogpError> {
        self.beta = beta;
        let active = self.active();
        self.model_designs(&active, model, beta)
    }

    /// Discarding phase. Returns the discarded indices.
    pub fn discard_phase(&mut self, cone: &ConeOrder, epsilon: f64) -> Result<Vec<usize>, VogpError> {
        let active = self.active();
        if active.is_empty() {
            return Ok(Vec::new());
        }
        let rects: Vec<&Hyperrectangle> = active.iter().map(|&i| self.rects[i].as_ref().unwrap()).collect();
        let pess: Vec<usize> = pessimistic_pareto(&rects, cone)?.into_iter().map(|k| active[k]).collect();
        let candidates: Vec<usize> = active
            .iter()
            .copied()
            .filter(|i| self.status[*i] == Status::Undecided && pess.binary_search(i).is_err())
            .collect();
        let drop: Vec<usize> = candidates
            .par_iter()
            .copied()
            .filter(|&i| {
                let r = self.rects[i].as_ref().unwrap();
                pess.iter().any(|&p| discard_check(r, self.rects[p].as_ref().unwrap(), cone, epsilon))
            })
            .collect();
        for &i in &drop {
            self.status[i] = Status::Discarded;
            self.rects[i] = None;
        }
        self.discarded_now.extend(&drop);
        Ok(drop)
    }

    /// `ω̄_t`: widest rectangle diagonal over `S_t ∪ P_t`.
    pub fn omega_bar(&self) -> f64 {
        self.active()
            .iter()
            .map(|&i| self.rects[i].as_ref().unwrap().diagonal())
            .fold(0.0, f64::max)
    }

    /// Pareto identification phase. Returns the newly identified indices.
    pub fn identify_phase(&mut self, cone: &ConeOrder, epsilon: f64) -> Result<Vec<usize>, VogpError> {
        let w = self.active();
        let undecided = self.undecided();
        let verdicts: Vec<Result<bool, ConvexError>> = undecided
            .par_iter()
            .map(|&i| {
                let r = self.rects[i].as_ref().unwrap();
                for &j in &w {
                    if j != i && epsilon_cover_check(r, self.rects[j].as_ref().unwrap(), cone, epsilon)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            })
            .collect();
        let mut promoted = Vec::new();
        for (&i, v) in undecided.iter().zip(verdicts) {
            if v? {
                promoted.push(i);
            }
        }
        for &i in &promoted {
            self.status[i] = Status::Pareto;
        }
        Ok(promoted)
    }

    /// Widest-diagonal design over `S_t ∪ P_t`.
    pub fn select(&self) -> Result<usize, VogpError> {
        let active = self.active();
        let widths: Vec<(usize, f64)> =
            active.iter().map(|&i| (i, self.rects[i].as_ref().unwrap().diagonal())).collect();
        select_evaluation(&widths)
    }

    /// Records `ω̄_t` for the invariant checks; call after discarding.
    pub fn note_omega_bar(&mut self) -> f64 {
        let w = self.omega_bar();
        let persisted = self
            .active()
            .iter()
            .filter(|&&i| self.born[i] < self.round)
            .map(|&i| self.rects[i].as_ref().unwrap().diagonal())
            .fold(0.0, f64::max);
        if let Some(prev) = self.last_omega_bar {
            if persisted > prev * (1.0 + 1e-12) + 1e-15 {
                self.report.omega_increases += 1;
            }
        }
        self.last_omega_bar = Some(w);
        self.omega_now = w;
        w
    }

    /// Flags a round that should have terminated but did not.
    pub fn check_termination(&mut self, cone: &ConeOrder, epsilon: f64) {
        if self.omega_now < epsilon / cone.d_c() && !self.undecided().is_empty() {
            self.report.termination_violations += 1;
        }
    }

    /// Evaluating phase: query and condition when designs remain undecided.
    pub fn evaluate_phase<F>(&mut self, model: &mut SurrogateModel, oracle: &mut F) -> Result<Option<usize>, VogpError>
    where
        F: FnMut(usize, &[f64]) -> Vec<f64>,
    {
        if self.undecided().is_empty() {
            return Ok(None);
        }
        let i = self.select()?;
        let y = oracle(i, &self.designs[i]);
        model.condition(&self.designs[i], &y)?;
        self.queries.push(Query { round: self.round, design: i, observation: y });
        Ok(Some(i))
    }

    /// Closes the round: logs it and advances `t`.
    pub fn finish_round(&mut self, selected: Option<usize>, identified: Vec<usize>) {
        self.rounds.push(RoundRecord {
            round: self.round,
            undecided: self.undecided().len(),
            predicted: self.predicted().len(),
            selected,
            omega_bar: self.omega_now,
            beta: self.beta,
            discarded: std::mem::take(&mut self.discarded_now),
            identified,
        });
        self.round += 1;
    }

    /// One full round of the discrete algorithm.
    pub fn step<F>(
        &mut self,
        model: &mut SurrogateModel,
        cone: &ConeOrder,
        params: &VogpParams,
        policy: &dyn WidthPolicy,
        oracle: &mut F,
    ) -> Result<(), VogpError>
    where
        F: FnMut(usize, &[f64]) -> Vec<f64>,
    {
        let beta = policy.beta(self.round, model);
        self.model_phase(model, beta)?;
        self.discard_phase(cone, params.epsilon)?;
        self.note_omega_bar();
        let identified = self.identify_phase(cone, params.epsilon)?;
        self.check_termination(cone, params.epsilon);
        let selected = self.evaluate_phase(model, oracle)?;
        self.finish_round(selected, identified);
        Ok(())
    }

    pub(crate) fn into_outcome(self, status: RunStatus, started: Instant) -> VogpOutcome {
        VogpOutcome {
            predicted: self.predicted(),
            status,
            invariants: self.report,
            rounds: self.rounds,
            queries: self.queries,
            wall_time_secs: started.elapsed().as_secs_f64(),
        }
    }
}

/// Lowest-index argmax of the widths.
pub fn select_evaluation(widths: &[(usize, f64)]) -> Result<usize, VogpError> {
    let mut best: Option<(usize, f64)> = None;
    for &(i, w) in widths {
        match best {
            Some((bi, bw)) if w < bw || (w == bw && i > bi) => {}
            _ => best = Some((i, w)),
        }
    }
    best.map(|(i, _)| i).ok_or(VogpError::EmptySet)
}

/// Runs the discrete algorithm to termination or the round cap.
///
/// `oracle(i, x)` returns a noisy observation of design `i` at `x`.
pub fn run<F>(
    designs: &[Vec<f64>],
    model: &mut SurrogateModel,
    cone: &ConeOrder,
    params: &VogpParams,
    policy: &dyn WidthPolicy,
    mut oracle: F,
) -> Result<VogpOutcome, VogpError>
where
    F: FnMut(usize, &[f64]) -> Vec<f64>,
{
    params.validate()?;
    if designs.is_empty() {
        return Err(VogpError::EmptyInput);
    }
    let started = Instant::now();
    let mut state = AlgState::new(designs.to_vec(), cone.dim());
    while !state.undecided().is_empty() {
        if state.round() > params.max_rounds {
            log::warn!("round cap {} reached with undecided designs", params.max_rounds);
            return Ok(state.into_outcome(RunStatus::MaxRoundsExceeded, started));
        }
        state.step(model, cone, params, policy, &mut oracle)?;
    }
    Ok(state.into_outcome(RunStatus::Terminated, started))
}
