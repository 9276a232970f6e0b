//! Geometric decisions on confidence hyperrectangles.

use rayon::prelude::*;

use crate::cone::ConeOrder;
use crate::convex::{self, ConvexError, FeasibilityProblem, Hyperrectangle};

/// `min` and `max` of `w^T y` over the box.
fn support(w: &[f64], r: &Hyperrectangle) -> (f64, f64) {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (wj, (l, u)) in w.iter().zip(r.lower().iter().zip(r.upper())) {
        let (a, b) = (wj * l, wj * u);
        lo += a.min(b);
        hi += a.max(b);
    }
    (lo, hi)
}

/// Every vertex `v` of `rect_x` and `v'` of `rect_x2` satisfy `v ≼_C v' + ε u*`.
///
/// A linear function attains its extremes over a box at vertices, so the
/// pairwise vertex test reduces to one support comparison per halfspace.
pub fn discard_check(rect_x: &Hyperrectangle, rect_x2: &Hyperrectangle, cone: &ConeOrder, epsilon: f64) -> bool {
    cone.w().iter().all(|w| {
        let (_, hi_x) = support(w, rect_x);
        let (lo_x2, _) = support(w, rect_x2);
        let shift: f64 = epsilon * convex::dot(w, cone.u_star());
        lo_x2 + shift - hi_x >= 0.0
    })
}

/// `∃ y ∈ rect_x, y' ∈ rect_x2 : y + ε u* ≼_C y'`.
///
/// Only `z = y' - y` enters the constraints, and it ranges over the box
/// `[l' - u, u' - l]`.
pub fn epsilon_cover_check(
    rect_x: &Hyperrectangle,
    rect_x2: &Hyperrectangle,
    cone: &ConeOrder,
    epsilon: f64,
) -> Result<bool, ConvexError> {
    let lower: Vec<f64> = rect_x2.lower().iter().zip(rect_x.upper()).map(|(a, b)| a - b).collect();
    let upper: Vec<f64> = rect_x2.upper().iter().zip(rect_x.lower()).map(|(a, b)| a - b).collect();
    let shift: Vec<f64> = cone.u_star().iter().map(|u| epsilon * u).collect();
    let b = cone.apply(&shift);
    convex::feasible_box_halfspaces(&FeasibilityProblem::new(
        Hyperrectangle::new(lower, upper),
        cone.w().to_vec(),
        b,
    ))
}

/// `∃ y ∈ rect : y ≼_C v`, i.e. `v ∈ rect + C`.
fn in_shifted(rect: &Hyperrectangle, v: &[f64], cone: &ConeOrder) -> Result<bool, ConvexError> {
    let a: Vec<Vec<f64>> = cone.w().iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    let b: Vec<f64> = cone.apply(v).iter().map(|x| -x).collect();
    convex::feasible_box_halfspaces(&FeasibilityProblem::new(rect.clone(), a, b))
}

/// `rect_a + C ⊆ rect_b + C`: every vertex of `rect_a` lies in `rect_b + C`.
fn shifted_subset(rect_a: &Hyperrectangle, rect_b: &Hyperrectangle, cone: &ConeOrder) -> Result<bool, ConvexError> {
    // Necessary condition first: each halfspace minimum over `rect_a` must
    // reach the one over `rect_b`.
    for w in cone.w() {
        if support(w, rect_a).0 < support(w, rect_b).0 - convex::CONSTRAINT_SLACK {
            return Ok(false);
        }
    }
    for v in rect_a.vertices() {
        if !in_shifted(rect_b, &v, cone)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Positions in `rects` whose cone-shifted rectangle is maximal under
/// inclusion: no other `R(x') + C` is a strict subset of `R(x) + C`.
pub fn pessimistic_pareto(rects: &[&Hyperrectangle], cone: &ConeOrder) -> Result<Vec<usize>, ConvexError> {
    let keep: Vec<Result<bool, ConvexError>> = (0..rects.len())
        .into_par_iter()
        .map(|i| {
            for j in 0..rects.len() {
                if i == j {
                    continue;
                }
                if shifted_subset(rects[j], rects[i], cone)? && !shifted_subset(rects[i], rects[j], cone)? {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect();
    let mut out = Vec::new();
    for (i, k) in keep.into_iter().enumerate() {
        if k? {
            out.push(i);
        }
    }
    Ok(out)
}
