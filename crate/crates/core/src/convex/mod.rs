//! Small dense convex subsolvers.
//!
//! Two problems show up everywhere in the cone machinery:
//!
//! * feasibility of `{ y : lower <= y <= upper, A y >= b }` ([`feasible_box_halfspaces`]),
//! * the minimum Euclidean norm point of `{ z : W z >= c }` ([`min_norm_qp`]).
//!
//! Both are tiny (a handful of variables, a few dozen constraints), so the solvers
//! are plain dense implementations with deterministic pivoting.

mod min_norm;
mod simplex;

pub use min_norm::{min_norm_qp, MinNormPoint};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Uniform slack applied to every halfspace constraint.
///
/// Feasibility is lenient: boundary-touching instances count as feasible.
pub const CONSTRAINT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConvexError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("box has non-finite bounds")]
    UnboundedBox,
    #[error("constraint system is infeasible")]
    Infeasible,
    #[error("solver did not converge within {0} iterations")]
    NotConverged(usize),
}

/// Axis-aligned box `[lower, upper]` in objective space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperrectangle {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Hyperrectangle {
    /// Panics if the bounds have different lengths or `lower > upper` somewhere.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len(), "bound dimensions differ");
        assert!(
            lower.iter().zip(&upper).all(|(l, u)| l <= u),
            "lower bound exceeds upper bound"
        );
        Self { lower, upper }
    }

    /// The whole space, `R^dim`. Only valid as the initial cumulative region.
    pub fn whole_space(dim: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn point(p: &[f64]) -> Self {
        Self {
            lower: p.to_vec(),
            upper: p.to_vec(),
        }
    }

    /// Box centred at `center` with the given half-widths.
    pub fn centered(center: &[f64], half_width: &[f64]) -> Self {
        let lower = center.iter().zip(half_width).map(|(c, h)| c - h).collect();
        let upper = center.iter().zip(half_width).map(|(c, h)| c + h).collect();
        Self::new(lower, upper)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_finite(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|v| v.is_finite())
    }

    /// Euclidean length of the diagonal.
    pub fn diagonal(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (u - l).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    pub fn contains_rect(&self, other: &Hyperrectangle) -> bool {
        (0..self.dim()).all(|j| self.lower[j] <= other.lower[j] && other.upper[j] <= self.upper[j])
    }

    /// Translates the box by `shift`.
    pub fn shifted(&self, shift: &[f64]) -> Self {
        Self {
            lower: self.lower.iter().zip(shift).map(|(a, s)| a + s).collect(),
            upper: self.upper.iter().zip(shift).map(|(a, s)| a + s).collect(),
        }
    }

    /// Intersects in place. Returns the coordinates where the intersection came
    /// out empty; those are collapsed onto the midpoint of the crossed bounds.
    pub fn intersect_collapsing(&mut self, other: &Hyperrectangle) -> Vec<usize> {
        let mut crossed = Vec::new();
        for j in 0..self.dim() {
            let lo = self.lower[j].max(other.lower[j]);
            let hi = self.upper[j].min(other.upper[j]);
            if lo > hi {
                let mid = 0.5 * (lo + hi);
                self.lower[j] = mid;
                self.upper[j] = mid;
                crossed.push(j);
            } else {
                self.lower[j] = lo;
                self.upper[j] = hi;
            }
        }
        crossed
    }

    /// All `2^dim` corners, ordered by the bit pattern of the coordinate choice
    /// (bit `j` set selects the upper bound in coordinate `j`).
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let m = self.dim();
        (0..1usize << m)
            .map(|mask| {
                (0..m)
                    .map(|j| {
                        if mask >> j & 1 == 1 {
                            self.upper[j]
                        } else {
                            self.lower[j]
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// `exists y in box : A y >= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityProblem {
    pub bounds: Hyperrectangle,
    /// Constraint rows, each of length `bounds.dim()`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl FeasibilityProblem {
    pub fn new(bounds: Hyperrectangle, a: Vec<Vec<f64>>, b: Vec<f64>) -> Self {
        Self { bounds, a, b }
    }
}

/// Decides whether some `y` in the box satisfies `A y >= b - CONSTRAINT_SLACK`.
///
/// Cheap exact screens run first (per-row box maximum for rejection, box
/// corners for acceptance); anything they leave undecided goes to a phase-one
/// simplex with Bland's rule.
pub fn feasible_box_halfspaces(p: &FeasibilityProblem) -> Result<bool, ConvexError> {
    let m = p.bounds.dim();
    if p.a.len() != p.b.len() {
        return Err(ConvexError::DimensionMismatch {
            expected: p.a.len(),
            got: p.b.len(),
        });
    }
    if let Some(row) = p.a.iter().find(|r| r.len() != m) {
        return Err(ConvexError::DimensionMismatch {
            expected: m,
            got: row.len(),
        });
    }
    if !p.bounds.is_finite() {
        return Err(ConvexError::UnboundedBox);
    }
    let lower = p.bounds.lower();
    let upper = p.bounds.upper();
    let rhs: Vec<f64> = p.b.iter().map(|b| b - CONSTRAINT_SLACK).collect();

    // Each row on its own must be attainable.
    for (row, &r) in p.a.iter().zip(&rhs) {
        let best: f64 = row
            .iter()
            .zip(lower.iter().zip(upper))
            .map(|(a, (l, u))| (a * l).max(a * u))
            .sum();
        if best < r {
            return Ok(false);
        }
    }

    let satisfies = |y: &[f64]| {
        p.a.iter()
            .zip(&rhs)
            .all(|(row, &r)| dot(row, y) >= r)
    };
    let center: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect();
    if satisfies(&center) {
        return Ok(true);
    }
    if m <= 8 && p.bounds.vertices().iter().any(|v| satisfies(v)) {
        return Ok(true);
    }

    simplex::phase_one_feasible(lower, upper, &p.a, &rhs)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
