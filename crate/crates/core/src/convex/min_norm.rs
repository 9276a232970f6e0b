//! Minimum-norm point of `{ z : W z >= c }` through its dual.
//!
//! The dual is `max_{lambda >= 0} c^T lambda - 0.5 ||W^T lambda||^2` with
//! `z = W^T lambda`. Cyclic projected coordinate ascent on `lambda` converges
//! for any Gram matrix; a final active-set solve cleans up the last digits.

use nalgebra::{DMatrix, DVector};

use super::{dot, ConvexError};

const KKT_TOL: f64 = 1e-8;
const MAX_SWEEPS: usize = 100_000;
const DIVERGENCE: f64 = 1e12;
const SLOW_SWEEPS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct MinNormPoint {
    pub z: Vec<f64>,
    pub norm: f64,
    /// Dual multipliers, one per row of `W`.
    pub lambda: Vec<f64>,
}

/// Minimum Euclidean-norm solution of `W z >= c`.
///
/// Returns the origin when `c <= 0`. Fails with [`ConvexError::Infeasible`]
/// when the region is empty.
pub fn min_norm_qp(w: &[Vec<f64>], c: &[f64]) -> Result<MinNormPoint, ConvexError> {
    let n = w.len();
    if c.len() != n {
        return Err(ConvexError::DimensionMismatch { expected: n, got: c.len() });
    }
    let m = w.first().map_or(0, Vec::len);
    if let Some(row) = w.iter().find(|r| r.len() != m) {
        return Err(ConvexError::DimensionMismatch { expected: m, got: row.len() });
    }
    if c.iter().all(|&ci| ci <= 0.0) {
        return Ok(MinNormPoint { z: vec![0.0; m], norm: 0.0, lambda: vec![0.0; n] });
    }

    let gram: Vec<f64> = (0..n * n).map(|k| dot(&w[k / n], &w[k % n])).collect();
    let c_scale = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = KKT_TOL * c_scale.max(1.0);

    let mut lambda = vec![0.0; n];
    let mut z = vec![0.0; m];
    let mut converged = false;
    for sweep in 0..MAX_SWEEPS {
        for i in 0..n {
            let gii = gram[i * n + i];
            if gii <= 0.0 {
                if c[i] > 0.0 {
                    return Err(ConvexError::Infeasible);
                }
                continue;
            }
            let step = (c[i] - dot(&w[i], &z)) / gii;
            let new = (lambda[i] + step).max(0.0);
            let delta = new - lambda[i];
            if delta != 0.0 {
                for (zj, wij) in z.iter_mut().zip(&w[i]) {
                    *zj += delta * wij;
                }
                lambda[i] = new;
            }
        }
        if lambda.iter().any(|l| *l > DIVERGENCE * c_scale.max(1.0)) {
            return Err(ConvexError::Infeasible);
        }
        if kkt_residual(w, c, &z, &lambda) < tol {
            converged = true;
            break;
        }
        if sweep == SLOW_SWEEPS && !region_nonempty(w, c, m, c_scale)? {
            return Err(ConvexError::Infeasible);
        }
    }

    if let Some((pz, pl)) = polish(w, c, &gram, &lambda) {
        if kkt_residual(w, c, &pz, &pl) < kkt_residual(w, c, &z, &lambda) {
            z = pz;
            lambda = pl;
            converged = converged || kkt_residual(w, c, &z, &lambda) < tol;
        }
    }
    if !converged {
        return Err(ConvexError::NotConverged(MAX_SWEEPS));
    }
    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(MinNormPoint { z, norm, lambda })
}

/// An empty region shows up as a dual ray; an LP on a huge box tells it
/// apart from slow convergence.
fn region_nonempty(w: &[Vec<f64>], c: &[f64], m: usize, c_scale: f64) -> Result<bool, ConvexError> {
    let r = 1e8 * c_scale.max(1.0);
    super::simplex::phase_one_feasible(&vec![-r; m], &vec![r; m], w, c)
}

/// Largest of primal infeasibility and complementarity violation.
fn kkt_residual(w: &[Vec<f64>], c: &[f64], z: &[f64], lambda: &[f64]) -> f64 {
    w.iter()
        .zip(c)
        .zip(lambda)
        .map(|((row, ci), li)| {
            let slack = dot(row, z) - ci;
            (-slack).max(0.0).max((li * slack).abs())
        })
        .fold(0.0, f64::max)
}

/// Re-solves the equality system on the rows that coordinate ascent left active.
fn polish(w: &[Vec<f64>], c: &[f64], gram: &[f64], lambda: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = w.len();
    let active: Vec<usize> = (0..n).filter(|&i| lambda[i] > 0.0).collect();
    if active.is_empty() {
        return None;
    }
    let k = active.len();
    let g = DMatrix::from_fn(k, k, |a, b| gram[active[a] * n + active[b]]);
    let rhs = DVector::from_iterator(k, active.iter().map(|&i| c[i]));
    let sol = g.lu().solve(&rhs)?;
    if sol.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return None;
    }
    let mut full = vec![0.0; n];
    for (a, &i) in active.iter().enumerate() {
        full[i] = sol[a];
    }
    let m = w[0].len();
    let mut z = vec![0.0; m];
    for (row, li) in w.iter().zip(&full) {
        for (zj, wij) in z.iter_mut().zip(row) {
            *zj += li * wij;
        }
    }
    Some((z, full))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye2() -> Vec<Vec<f64>> {
        vec![vec![1.0, 0.0], vec![0.0, 1.0]]
    }

    #[test]
    fn orthant_corner() {
        let p = min_norm_qp(&eye2(), &[1.0, 1.0]).unwrap();
        assert!((p.z[0] - 1.0).abs() < 1e-12 && (p.z[1] - 1.0).abs() < 1e-12);
        assert!((p.norm - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_rhs_gives_origin() {
        let p = min_norm_qp(&eye2(), &[-1.0, -1.0]).unwrap();
        assert_eq!(p.z, vec![0.0, 0.0]);
        assert_eq!(p.norm, 0.0);
    }

    #[test]
    fn one_sided_constraint() {
        let p = min_norm_qp(&eye2(), &[2.0, -5.0]).unwrap();
        assert!((p.z[0] - 2.0).abs() < 1e-10);
        assert!(p.z[1].abs() < 1e-10);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let w = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        assert_eq!(min_norm_qp(&w, &[1.0, 1.0]), Err(ConvexError::Infeasible));
    }

    #[test]
    fn redundant_rows() {
        let s = 0.5f64.sqrt();
        let w = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![s, s]];
        let p = min_norm_qp(&w, &[1.0, 1.0, 0.1]).unwrap();
        assert!((p.norm - 2f64.sqrt()).abs() < 1e-9);
    }
}
