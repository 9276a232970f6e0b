//! Polyhedral ordering cones `C = { x : W x >= 0 }` and the partial order they induce.
//!
//! `y ≼_C y2` means `y2 - y ∈ C`: larger is better along every defining
//! halfspace normal.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::convex::{self, dot, min_norm_qp, ConvexError, FeasibilityProblem, Hyperrectangle};

const INTERIOR_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConeError {
    #[error("row {0} of the cone matrix is zero")]
    ZeroRow(usize),
    #[error("cone is not pointed")]
    NotPointed,
    #[error("cone has empty interior")]
    EmptyInterior,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cone angle {0} is outside (0, 180) degrees")]
    ThetaOutOfRange(f64),
    #[error("empty input")]
    EmptyInput,
    #[error("unknown builtin cone `{name}` in dimension {dim}")]
    UnknownBuiltin { name: String, dim: usize },
    #[error("cone spec line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Convex(#[from] ConvexError),
}

/// An immutable pointed, solid polyhedral cone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeOrder {
    w: Vec<Vec<f64>>,
    u_star: Vec<f64>,
    d_c: f64,
    /// `max { w_n^T u : u ∈ C, ||u|| <= 1 }` per row, used by the gap fast path.
    support: Vec<f64>,
}

impl ConeOrder {
    /// Normalizes the rows and validates that the cone is pointed and solid.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, ConeError> {
        let m = rows.first().map(Vec::len).ok_or(ConeError::EmptyInput)?;
        if m == 0 {
            return Err(ConeError::EmptyInput);
        }
        let mut w = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(ConeError::DimensionMismatch { expected: m, got: row.len() });
            }
            let norm = dot(&row, &row).sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(ConeError::ZeroRow(i));
            }
            w.push(row.into_iter().map(|v| v / norm).collect::<Vec<f64>>());
        }
        if w.len() < m || !is_pointed(&w)? {
            return Err(ConeError::NotPointed);
        }
        if !has_interior(&w)? {
            return Err(ConeError::EmptyInterior);
        }

        let ones = vec![1.0; w.len()];
        let a1 = min_norm_qp(&w, &ones)?;
        let d_c = a1.norm;
        let u_star = a1.z.iter().map(|v| v / d_c).collect();

        let mut support = Vec::with_capacity(w.len());
        for row in &w {
            let c: Vec<f64> = w.iter().map(|r| -dot(r, row)).collect();
            let p = min_norm_qp(&w, &c)?;
            let proj: Vec<f64> = row.iter().zip(&p.z).map(|(a, b)| a + b).collect();
            support.push(dot(&proj, &proj).sqrt());
        }
        Ok(Self { w, u_star, d_c, support })
    }

    /// 2D cone whose boundary rays sit at `45° ± theta/2`.
    ///
    /// `theta = 90` is the positive orthant; smaller angles give a narrower
    /// cone, hence a sparser order and a harder identification problem.
    pub fn cone_2d(theta_degrees: f64) -> Result<Self, ConeError> {
        if !(theta_degrees > 0.0 && theta_degrees < 180.0) {
            return Err(ConeError::ThetaOutOfRange(theta_degrees));
        }
        let a1 = (45.0 - theta_degrees / 2.0).to_radians();
        let a2 = (45.0 + theta_degrees / 2.0).to_radians();
        // Inward normals: ray a1 rotated +90°, ray a2 rotated -90°.
        let rows = vec![vec![-a1.sin(), a1.cos()], vec![a2.sin(), -a2.cos()]];
        Self::new(rows)
    }

    /// Named benchmark cones: `acute`, `right`, `obtuse` in 2 or 3 dimensions.
    pub fn builtin(name: &str, dim: usize) -> Result<Self, ConeError> {
        let unknown = || ConeError::UnknownBuiltin { name: name.to_string(), dim };
        match (name, dim) {
            ("acute", 2) => Self::cone_2d(60.0),
            ("right", 2) => Self::cone_2d(90.0),
            ("obtuse", 2) => Self::cone_2d(120.0),
            ("right", d) if d >= 1 => Self::new(
                (0..d)
                    .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                    .collect(),
            ),
            ("acute", 3) => Self::new(vec![
                vec![1.0, -2.0, 4.0],
                vec![4.0, 1.0, -2.0],
                vec![-2.0, 4.0, 1.0],
            ]),
            ("obtuse", 3) => Self::new(vec![
                vec![1.0, 0.4, 1.6],
                vec![1.6, 1.0, 0.4],
                vec![0.4, 1.6, 1.0],
            ]),
            _ => Err(unknown()),
        }
    }

    /// Parses a cone file: either `theta:<degrees>` or one whitespace-separated
    /// row per line. Blank lines and `#` comments are ignored.
    pub fn parse_spec(text: &str) -> Result<Self, ConeError> {
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(theta) = line.strip_prefix("theta:") {
                if !rows.is_empty() {
                    return Err(ConeError::Parse {
                        line: i + 1,
                        message: "theta spec mixed with matrix rows".into(),
                    });
                }
                let theta: f64 = theta.trim().parse().map_err(|_| ConeError::Parse {
                    line: i + 1,
                    message: format!("bad angle `{}`", theta.trim()),
                })?;
                return Self::cone_2d(theta);
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| ConeError::Parse {
                        line: i + 1,
                        message: format!("bad number `{tok}`"),
                    })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(row);
        }
        Self::new(rows)
    }

    /// Rows of `W`, each of unit length.
    pub fn w(&self) -> &[Vec<f64>] {
        &self.w
    }

    /// Number of halfspaces `N`.
    pub fn n_halfspaces(&self) -> usize {
        self.w.len()
    }

    /// Objective dimension `M`.
    pub fn dim(&self) -> usize {
        self.u_star.len()
    }

    /// Unit accuracy direction.
    pub fn u_star(&self) -> &[f64] {
        &self.u_star
    }

    /// Ordering hardness: `min ||z||` over `{ z : W z >= 1 }`.
    pub fn d_c(&self) -> f64 {
        self.d_c
    }

    /// `W y`.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        self.w.iter().map(|row| dot(row, y)).collect()
    }

    /// `y ≼_C y2`, or the strict version when `strict` is set. Pure sign tests.
    pub fn dominates(&self, y: &[f64], y2: &[f64], strict: bool) -> Result<bool, ConeError> {
        self.check_dim(y.len())?;
        self.check_dim(y2.len())?;
        Ok(self.dominates_unchecked(y, y2, strict))
    }

    pub(crate) fn dominates_unchecked(&self, y: &[f64], y2: &[f64], strict: bool) -> bool {
        self.w.iter().all(|row| {
            let s: f64 = row.iter().zip(y.iter().zip(y2)).map(|(w, (a, b))| w * (b - a)).sum();
            if strict {
                s > 0.0
            } else {
                s >= 0.0
            }
        })
    }

    /// Suboptimality gap `m(x, x')` with `delta = f(x') - f(x)`.
    ///
    /// The smallest `s >= 0` such that some unit `u ∈ C` moves `f(x) + s u`
    /// out of `f(x') - int C`. Escaping through halfspace `n` needs
    /// `s * w_n^T u >= w_n^T delta`, and the best unit `u ∈ C` attains
    /// `w_n^T u = ||Π_C(w_n)||`, which gives a closed form.
    pub fn m_gap(&self, delta: &[f64]) -> f64 {
        self.w
            .iter()
            .zip(&self.support)
            .map(|(row, h)| dot(row, delta) / h)
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }

    /// `Δ*_x = max_{x' ∈ P*} m(x, x')` for every design.
    pub fn suboptimality_gaps(&self, objectives: &[Vec<f64>]) -> Result<Vec<f64>, ConeError> {
        if objectives.is_empty() {
            return Err(ConeError::EmptyInput);
        }
        for y in objectives {
            self.check_dim(y.len())?;
        }
        let front = crate::metrics::pareto_indices(objectives, self);
        Ok(objectives
            .iter()
            .map(|y| {
                front
                    .iter()
                    .map(|&p| {
                        let delta: Vec<f64> = objectives[p].iter().zip(y).map(|(a, b)| a - b).collect();
                        self.m_gap(&delta)
                    })
                    .fold(0.0, f64::max)
            })
            .collect())
    }

    fn check_dim(&self, got: usize) -> Result<(), ConeError> {
        if got != self.dim() {
            return Err(ConeError::DimensionMismatch { expected: self.dim(), got });
        }
        Ok(())
    }
}

impl fmt::Display for ConeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.w {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Builtin cone names with a short description, for listings.
pub const BUILTIN_CONES: &[(&str, &str)] = &[
    ("acute", "2D: 60 degree cone; 3D: narrow cone"),
    ("right", "positive orthant (Pareto order)"),
    ("obtuse", "2D: 120 degree cone; 3D: wide cone"),
];

/// Pointed iff no nonzero `x` has `W x = 0`. Any such `x` can be scaled and
/// signed so that some coordinate equals 1 and the rest lie in `[-1, 1]`.
fn is_pointed(w: &[Vec<f64>]) -> Result<bool, ConeError> {
    let m = w[0].len();
    let mut a = w.to_vec();
    a.extend(w.iter().map(|r| r.iter().map(|v| -v).collect::<Vec<f64>>()));
    let b = vec![0.0; a.len()];
    for j in 0..m {
        let mut lower = vec![-1.0; m];
        let mut upper = vec![1.0; m];
        lower[j] = 1.0;
        upper[j] = 1.0;
        let p = FeasibilityProblem::new(Hyperrectangle::new(lower, upper), a.clone(), b.clone());
        if convex::feasible_box_halfspaces(&p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn has_interior(w: &[Vec<f64>]) -> Result<bool, ConeError> {
    let m = w[0].len();
    let p = FeasibilityProblem::new(
        Hyperrectangle::new(vec![-1.0; m], vec![1.0; m]),
        w.to_vec(),
        vec![INTERIOR_MARGIN + convex::CONSTRAINT_SLACK; w.len()],
    );
    Ok(convex::feasible_box_halfspaces(&p)?)
}
