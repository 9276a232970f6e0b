//! Continuous design spaces through adaptive discretization of `[0, 1]^D`.
//!
//! Leaves of a cell tree act as designs (queried at their centers). A leaf is
//! bisected along every axis once its confidence rectangle is narrow compared
//! with the cell, discarding prunes whole cells, and Pareto identification
//! waits until every undecided leaf has reached the maximum depth.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::cone::ConeOrder;
use crate::gp::{GpError, SurrogateModel};
use crate::metrics;
use crate::vogp::{AlgState, RunStatus, VogpError, VogpOutcome, VogpParams, WidthPolicy};

/// Largest grid accepted by [`extract_dense_pareto`].
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdadiscError {
    #[error("cell {0} is already at the maximum depth")]
    DepthExceeded(usize),
    #[error("cell {0} was already expanded")]
    AlreadyExpanded(usize),
    #[error("cell {0} is pruned")]
    Pruned(usize),
    #[error("grid of {0} points exceeds the limit")]
    GridTooLarge(usize),
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error(transparent)]
    Vogp(#[from] VogpError),
    #[error(transparent)]
    Gp(#[from] GpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Leaf,
    Expanded,
    Pruned,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub depth: usize,
    pub status: CellStatus,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

impl Cell {
    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| (u - l).powi(2)).sum::<f64>().sqrt()
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).product()
    }
}

/// Dyadic partition tree of the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellTree {
    cells: Vec<Cell>,
    max_depth: usize,
}

impl CellTree {
    pub fn new(dim: usize, max_depth: usize) -> Self {
        let root = Cell {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
            depth: 0,
            status: CellStatus::Leaf,
            parent: None,
            children: Vec::new(),
        };
        Self { cells: vec![root], max_depth }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, id: usize) -> &Cell {
        &self.cells[id]
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn dim(&self) -> usize {
        self.cells[0].lower.len()
    }

    /// Leaf ids in creation order.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.cells.len()).filter(|&i| self.cells[i].status == CellStatus::Leaf).collect()
    }

    /// Splits a leaf into `2^D` children by bisecting every axis. Child `k`
    /// takes the upper half of axis `j` when bit `j` of `k` is set.
    pub fn refine(&mut self, id: usize) -> Result<Vec<usize>, AdadiscError> {
        let cell = &self.cells[id];
        match cell.status {
            CellStatus::Expanded => return Err(AdadiscError::AlreadyExpanded(id)),
            CellStatus::Pruned => return Err(AdadiscError::Pruned(id)),
            CellStatus::Leaf => {}
        }
        if cell.depth >= self.max_depth {
            return Err(AdadiscError::DepthExceeded(id));
        }
        let d = self.dim();
        let mid = cell.center();
        let (lower, upper, depth) = (cell.lower.clone(), cell.upper.clone(), cell.depth);
        let mut ids = Vec::with_capacity(1 << d);
        for k in 0..1usize << d {
            let mut lo = lower.clone();
            let mut hi = upper.clone();
            for j in 0..d {
                if k >> j & 1 == 1 {
                    lo[j] = mid[j];
                } else {
                    hi[j] = mid[j];
                }
            }
            ids.push(self.cells.len());
            self.cells.push(Cell {
                lower: lo,
                upper: hi,
                depth: depth + 1,
                status: CellStatus::Leaf,
                parent: Some(id),
                children: Vec::new(),
            });
        }
        self.cells[id].status = CellStatus::Expanded;
        self.cells[id].children = ids.clone();
        Ok(ids)
    }

    pub fn prune(&mut self, id: usize) {
        self.cells[id].status = CellStatus::Pruned;
    }

    /// Total volume of leaves and pruned cells; equals 1 for a consistent tree.
    pub fn covered_volume(&self) -> f64 {
        self.cells
            .iter()
            .filter(|c| matches!(c.status, CellStatus::Leaf | CellStatus::Pruned))
            .map(Cell::volume)
            .sum()
    }

    /// Leaf counts per depth.
    pub fn depth_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.max_depth + 1];
        for c in &self.cells {
            if c.status == CellStatus::Leaf {
                h[c.depth] += 1;
            }
        }
        h
    }
}

/// Width policy for continuous domains:
/// `β_t = (B + sqrt(2 (γ_t + 1 + ln(1/δ))))² / divisor`, with `γ_t` the
/// information gain of the observations collected so far.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RkhsWidthPolicy {
    pub rkhs_bound: f64,
    pub delta: f64,
    pub scale_divisor: f64,
}

impl WidthPolicy for RkhsWidthPolicy {
    fn beta(&self, _t: usize, model: &SurrogateModel) -> f64 {
        let gamma = model.information_gain();
        let root = (2.0 * (gamma + 1.0 + (1.0 / self.delta).ln())).sqrt();
        (self.rkhs_bound + root).powi(2) / self.scale_divisor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuousOptions {
    pub max_depth: usize,
    /// A leaf splits once its rectangle diagonal is at most this times the cell diameter.
    pub split_factor: f64,
    /// Depth to which the tree is uniformly refined before the first round.
    pub initial_depth: usize,
}

impl Default for ContinuousOptions {
    fn default() -> Self {
        Self { max_depth: 5, split_factor: 1.0, initial_depth: 0 }
    }
}

/// Per-round tree statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeRecord {
    pub round: usize,
    pub active_leaves: usize,
    pub depth_histogram: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuousOutcome {
    pub outcome: VogpOutcome,
    /// Cell ids of the predicted Pareto leaves.
    pub predicted_cells: Vec<usize>,
    pub tree: CellTree,
    pub tree_records: Vec<TreeRecord>,
    /// Design index (in `outcome`) to cell id.
    pub design_cells: Vec<usize>,
}

/// Runs the algorithm with tree leaves as designs.
///
/// `oracle(x)` returns a noisy observation at design point `x`.
pub fn run_continuous<F>(
    dim: usize,
    model: &mut SurrogateModel,
    cone: &ConeOrder,
    params: &VogpParams,
    policy: &dyn WidthPolicy,
    opts: &ContinuousOptions,
    mut oracle: F,
) -> Result<ContinuousOutcome, AdadiscError>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    params.validate()?;
    if dim == 0 {
        return Err(AdadiscError::InvalidOption("dimension must be positive".into()));
    }
    if opts.initial_depth > opts.max_depth {
        return Err(AdadiscError::InvalidOption("initial depth exceeds maximum depth".into()));
    }
    let started = Instant::now();
    let m = cone.dim();
    let mut tree = CellTree::new(dim, opts.max_depth);
    for _ in 0..opts.initial_depth {
        for leaf in tree.leaves() {
            tree.refine(leaf)?;
        }
    }
    let mut design_cells: Vec<usize> = tree.leaves();
    let mut state = AlgState::new(design_cells.iter().map(|&c| tree.cell(c).center()).collect(), m);
    let mut tree_records = Vec::new();
    let mut oracle_by_index = |_: usize, x: &[f64]| oracle(x);

    let status = loop {
        if state.undecided().is_empty() {
            break RunStatus::Terminated;
        }
        if state.round() > params.max_rounds {
            log::warn!("round cap {} reached with undecided cells", params.max_rounds);
            break RunStatus::MaxRoundsExceeded;
        }
        let beta = policy.beta(state.round(), model);
        state.model_phase(model, beta)?;

        // Refine confident leaves; children are modeled right away and may
        // split again in the same round.
        loop {
            let ready: Vec<usize> = state
                .undecided()
                .into_iter()
                .filter(|&i| {
                    let cell = tree.cell(design_cells[i]);
                    cell.depth < opts.max_depth
                        && state.rect(i).unwrap().diagonal() <= opts.split_factor * cell.diameter()
                })
                .collect();
            if ready.is_empty() {
                break;
            }
            let mut fresh = Vec::new();
            for i in ready {
                let children = tree.refine(design_cells[i])?;
                state.retire(i);
                for c in children {
                    let id = state.add_design(tree.cell(c).center(), m);
                    design_cells.push(c);
                    fresh.push(id);
                }
            }
            state.model_designs(&fresh, model, beta)?;
        }

        for i in state.discard_phase(cone, params.epsilon)? {
            tree.prune(design_cells[i]);
        }
        state.note_omega_bar();
        let expanded = state
            .undecided()
            .iter()
            .all(|&i| tree.cell(design_cells[i]).depth >= opts.max_depth);
        let identified = if expanded {
            let ids = state.identify_phase(cone, params.epsilon)?;
            state.check_termination(cone, params.epsilon);
            ids
        } else {
            Vec::new()
        };
        let selected = state.evaluate_phase(model, &mut oracle_by_index)?;
        tree_records.push(TreeRecord {
            round: state.round(),
            active_leaves: state.active().len(),
            depth_histogram: tree.depth_histogram(),
        });
        state.finish_round(selected, identified);
    };

    debug_assert!(state.active().iter().all(|&i| tree.cell(design_cells[i]).status == CellStatus::Leaf));
    let outcome = state.into_outcome(status, started);
    let predicted_cells = outcome.predicted.iter().map(|&i| design_cells[i]).collect();
    Ok(ContinuousOutcome { outcome, predicted_cells, tree, tree_records, design_cells })
}

/// Uniform grid over `[0, 1]^D` with `per_dim` points per axis, endpoints
/// included, in row-major order with the last axis fastest. A single point
/// per axis sits at the midpoint.
pub fn unit_grid(dim: usize, per_dim: usize) -> Result<Vec<Vec<f64>>, AdadiscError> {
    let total = per_dim.checked_pow(dim as u32).filter(|n| *n <= MAX_GRID_POINTS);
    let Some(total) = total else {
        return Err(AdadiscError::GridTooLarge(per_dim.saturating_pow(dim as u32)));
    };
    let coord = |k: usize| if per_dim == 1 { 0.5 } else { k as f64 / (per_dim - 1) as f64 };
    Ok((0..total)
        .map(|mut idx| {
            let mut x = vec![0.0; dim];
            for j in (0..dim).rev() {
                x[j] = coord(idx % per_dim);
                idx /= per_dim;
            }
            x
        })
        .collect())
}

/// Dense Pareto set of the posterior mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseFront {
    pub designs: Vec<Vec<f64>>,
    pub means: Vec<Vec<f64>>,
}

/// Evaluates the posterior mean on a uniform grid and keeps its cone-Pareto subset.
pub fn extract_dense_pareto(
    model: &SurrogateModel,
    dim: usize,
    cone: &ConeOrder,
    grid_per_dim: usize,
) -> Result<DenseFront, AdadiscError> {
    use rayon::prelude::*;
    let grid = unit_grid(dim, grid_per_dim)?;
    let means: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|x| model.posterior_mean(x))
        .collect::<Result<_, _>>()?;
    let front = metrics::pareto_indices(&means, cone);
    Ok(DenseFront {
        designs: front.iter().map(|&i| grid[i].clone()).collect(),
        means: front.iter().map(|&i| means[i].clone()).collect(),
    })
}
