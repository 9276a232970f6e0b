//! Evaluation of predicted Pareto sets: true fronts, ε-F1, the PAC success
//! conditions, and cone hypervolume.

use serde::Serialize;
use thiserror::Error;

use crate::cone::ConeOrder;
use crate::convex::{dot, min_norm_qp, ConvexError};

/// Slack on the ε comparisons of the coverage test.
pub const COVER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("empty input")]
    EmptyInput,
    #[error("empty front")]
    EmptyFront,
    #[error("index {index} out of range for {len} designs")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Convex(#[from] ConvexError),
}

/// Summary of how a predicted set compares with the truth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontEvaluation {
    pub true_pareto: Vec<usize>,
    pub predicted: Vec<usize>,
    pub eps_f1: f64,
    pub pac_success: bool,
    pub gaps: Vec<f64>,
    pub true_positives: usize,
    pub false_negatives: usize,
    pub false_positives: usize,
}

/// Indices not dominated through `C \ {0}` by any other point.
pub fn true_pareto_front(objectives: &[Vec<f64>], cone: &ConeOrder) -> Result<Vec<usize>, MetricsError> {
    if objectives.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    check_dims(objectives, cone.dim())?;
    Ok(pareto_indices(objectives, cone))
}

/// Unchecked core of [`true_pareto_front`]. Returns indices in increasing order.
///
/// Works on the images `W y`, where the cone order becomes the componentwise
/// order. Points are visited in lexicographically decreasing image order, so
/// every dominator of a point is visited before it and a nondominated archive
/// suffices.
pub(crate) fn pareto_indices(objectives: &[Vec<f64>], cone: &ConeOrder) -> Vec<usize> {
    let images: Vec<Vec<f64>> = objectives.iter().map(|y| cone.apply(y)).collect();
    let mut order: Vec<usize> = (0..objectives.len()).collect();
    order.sort_by(|&a, &b| {
        images[b]
            .iter()
            .zip(&images[a])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut archive: Vec<usize> = Vec::new();
    for &i in &order {
        let zi = &images[i];
        let dominated = archive.iter().any(|&a| {
            let za = &images[a];
            za.iter().zip(zi).all(|(p, q)| p >= q) && objectives[a] != objectives[i]
        });
        if !dominated {
            archive.push(i);
        }
    }
    archive.sort_unstable();
    archive
}

/// Smallest `||u||` with `u ∈ C` and `y_star ≼_C y + u`.
pub fn cover_distance(cone: &ConeOrder, y_star: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    let c: Vec<f64> = cone
        .w()
        .iter()
        .map(|row| {
            let d: f64 = row.iter().zip(y_star.iter().zip(y)).map(|(w, (a, b))| w * (a - b)).sum();
            d.max(0.0)
        })
        .collect();
    Ok(min_norm_qp(cone.w(), &c)?.norm)
}

/// Whether some member of `predicted` ε-covers `y_star`.
fn is_covered(
    objectives: &[Vec<f64>],
    cone: &ConeOrder,
    predicted: &[usize],
    star: usize,
    epsilon: f64,
) -> Result<bool, MetricsError> {
    for &p in predicted {
        if cover_distance(cone, &objectives[star], &objectives[p])? <= epsilon + COVER_TOL {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Computes every front metric for a predicted index set.
pub fn evaluate_front(
    objectives: &[Vec<f64>],
    cone: &ConeOrder,
    predicted: &[usize],
    epsilon: f64,
) -> Result<FrontEvaluation, MetricsError> {
    if objectives.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    check_dims(objectives, cone.dim())?;
    if let Some(&index) = predicted.iter().find(|&&i| i >= objectives.len()) {
        return Err(MetricsError::IndexOutOfRange { index, len: objectives.len() });
    }
    let mut predicted = predicted.to_vec();
    predicted.sort_unstable();
    predicted.dedup();

    let true_pareto = pareto_indices(objectives, cone);
    let gaps = gaps_against(objectives, cone, &true_pareto);
    let mut false_negatives = 0;
    for &s in &true_pareto {
        if !is_covered(objectives, cone, &predicted, s, epsilon)? {
            false_negatives += 1;
        }
    }
    let true_positives = predicted.iter().filter(|&&p| gaps[p] <= epsilon + COVER_TOL).count();
    let false_positives = predicted.len() - true_positives;
    let denom = 2 * true_positives + false_negatives + false_positives;
    let eps_f1 = if denom == 0 { 0.0 } else { 2.0 * true_positives as f64 / denom as f64 };

    let is_pareto = |i: usize| true_pareto.binary_search(&i).is_ok();
    let pac_success = false_negatives == 0
        && predicted
            .iter()
            .filter(|&&p| !is_pareto(p))
            .all(|&p| gaps[p] <= 2.0 * epsilon + COVER_TOL);

    Ok(FrontEvaluation {
        true_pareto,
        predicted,
        eps_f1,
        pac_success,
        gaps,
        true_positives,
        false_negatives,
        false_positives,
    })
}

/// ε-lenient F1 score of a predicted set.
pub fn epsilon_f1(
    objectives: &[Vec<f64>],
    cone: &ConeOrder,
    predicted: &[usize],
    epsilon: f64,
) -> Result<f64, MetricsError> {
    Ok(evaluate_front(objectives, cone, predicted, epsilon)?.eps_f1)
}

/// Both success conditions: every Pareto design is ε-covered, and every
/// returned non-Pareto design has gap at most `2ε`.
pub fn pac_success(
    objectives: &[Vec<f64>],
    cone: &ConeOrder,
    predicted: &[usize],
    epsilon: f64,
) -> Result<bool, MetricsError> {
    Ok(evaluate_front(objectives, cone, predicted, epsilon)?.pac_success)
}

fn gaps_against(objectives: &[Vec<f64>], cone: &ConeOrder, front: &[usize]) -> Vec<f64> {
    objectives
        .iter()
        .map(|y| {
            front
                .iter()
                .map(|&p| {
                    let delta: Vec<f64> = objectives[p].iter().zip(y).map(|(a, b)| a - b).collect();
                    cone.m_gap(&delta)
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Lebesgue measure of `∪_i [W r, W y_i]`.
///
/// Points whose image does not dominate `W r` are dropped with a warning.
pub fn cone_hypervolume(front: &[Vec<f64>], cone: &ConeOrder, reference: &[f64]) -> Result<f64, MetricsError> {
    if front.is_empty() {
        return Err(MetricsError::EmptyFront);
    }
    check_dims(front, cone.dim())?;
    check_dims(std::slice::from_ref(&reference.to_vec()), cone.dim())?;
    let r = cone.apply(reference);
    let mut shifted: Vec<Vec<f64>> = Vec::with_capacity(front.len());
    for y in front {
        let z: Vec<f64> = cone.apply(y).iter().zip(&r).map(|(a, b)| a - b).collect();
        if z.iter().any(|v| *v < 0.0) {
            log::warn!("hypervolume: point {y:?} does not dominate the reference and is ignored");
            continue;
        }
        shifted.push(z);
    }
    Ok(union_volume(shifted))
}

/// `|HV_C(true) - HV_C(predicted)|` at a shared reference point.
pub fn hv_discrepancy(
    predicted: &[Vec<f64>],
    truth: &[Vec<f64>],
    cone: &ConeOrder,
    reference: &[f64],
) -> Result<f64, MetricsError> {
    if predicted.is_empty() || truth.is_empty() {
        return Err(MetricsError::EmptyFront);
    }
    Ok((cone_hypervolume(truth, cone, reference)? - cone_hypervolume(predicted, cone, reference)?).abs())
}

/// Reference point below every given point by a margin of a tenth of the
/// spread along each halfspace normal.
///
/// With `W = I` this is the componentwise minimum minus `0.1 * range`.
pub fn default_reference(points: &[Vec<f64>], cone: &ConeOrder) -> Result<Vec<f64>, MetricsError> {
    if points.is_empty() {
        return Err(MetricsError::EmptyFront);
    }
    check_dims(points, cone.dim())?;
    let m = cone.dim();
    let anchor: Vec<f64> = (0..m)
        .map(|j| points.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min))
        .collect();
    let b: Vec<f64> = cone
        .w()
        .iter()
        .map(|row| {
            let proj: Vec<f64> = points.iter().map(|p| dot(row, p)).collect();
            let hi = proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = proj.iter().cloned().fold(f64::INFINITY, f64::min);
            let range = if hi > lo { hi - lo } else { 1.0 };
            (dot(row, &anchor) - lo) + 0.1 * range
        })
        .collect();
    let z = min_norm_qp(cone.w(), &b)?.z;
    Ok(anchor.iter().zip(&z).map(|(a, s)| a - s).collect())
}

/// Volume of the union of boxes `[0, p]` for nonnegative points.
fn union_volume(points: Vec<Vec<f64>>) -> f64 {
    let mut pts = nondominated(points);
    if pts.is_empty() {
        return 0.0;
    }
    let d = pts[0].len();
    match d {
        1 => pts.iter().map(|p| p[0]).fold(0.0, f64::max),
        2 => {
            pts.sort_by(|a, b| b[0].total_cmp(&a[0]));
            let mut vol = 0.0;
            let mut best_y = 0.0;
            for p in &pts {
                if p[1] > best_y {
                    vol += p[0] * (p[1] - best_y);
                    best_y = p[1];
                }
            }
            vol
        }
        _ => {
            // Slice along the last coordinate.
            pts.sort_by(|a, b| b[d - 1].total_cmp(&a[d - 1]));
            let mut vol = 0.0;
            for k in 0..pts.len() {
                let top = pts[k][d - 1];
                let bottom = pts.get(k + 1).map_or(0.0, |p| p[d - 1]);
                if top > bottom {
                    let slab: Vec<Vec<f64>> = pts[..=k].iter().map(|p| p[..d - 1].to_vec()).collect();
                    vol += (top - bottom) * union_volume(slab);
                }
            }
            vol
        }
    }
}

/// Drops points weakly dominated by another (keeping one copy of duplicates).
fn nondominated(mut points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    points.sort_by(|a, b| {
        b.iter()
            .zip(a)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    points.dedup();
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if !kept.iter().any(|k| k.iter().zip(&p).all(|(a, b)| a >= b)) {
            kept.push(p);
        }
    }
    kept
}

fn check_dims(points: &[Vec<f64>], m: usize) -> Result<(), MetricsError> {
    match points.iter().find(|p| p.len() != m) {
        Some(p) => Err(MetricsError::DimensionMismatch { expected: m, got: p.len() }),
        None => Ok(()),
    }
}
