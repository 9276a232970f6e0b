//! Brute-force oracles and random instance generators shared by the
//! integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use vogp::convex::{feasible_box_halfspaces, min_norm_qp, FeasibilityProblem, Hyperrectangle};
use vogp::vogp::discard_check;
use vogp::ConeOrder;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn gaussian(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// A 2D cone with a random opening angle or a random solid 3D cone around
/// the diagonal.
pub fn random_cone(rng: &mut ChaCha8Rng) -> ConeOrder {
    if rng.random_bool(0.5) {
        return ConeOrder::cone_2d(rng.random_range(30.0..170.0)).unwrap();
    }
    let axis = [1.0 / 3f64.sqrt(); 3];
    loop {
        let n = rng.random_range(3..=5);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let g = gaussian(rng, 3);
                axis.iter().zip(&g).map(|(a, e)| a + 0.7 * e).collect()
            })
            .collect();
        if let Ok(c) = ConeOrder::new(rows) {
            if c.d_c() < 20.0 {
                return c;
            }
        }
    }
}

pub fn in_cone(cone: &ConeOrder, v: &[f64], tol: f64) -> bool {
    cone.w().iter().all(|w| dot(w, v) >= -tol)
}

pub fn in_interior(cone: &ConeOrder, v: &[f64]) -> bool {
    cone.w().iter().all(|w| dot(w, v) > 0.0)
}

/// Unit directions inside the cone: an even angular grid in 2D, rejection
/// samples in higher dimensions.
pub fn cone_directions(cone: &ConeOrder, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    if cone.dim() == 2 {
        // The cone spans at most half the circle around its axis.
        let axis = cone.u_star();
        let a0 = axis[1].atan2(axis[0]);
        return (0..count)
            .map(|k| {
                let a = a0 - std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * k as f64 / (count - 1) as f64;
                vec![a.cos(), a.sin()]
            })
            .filter(|u| in_cone(cone, u, 0.0))
            .collect();
    }
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g = gaussian(rng, cone.dim());
        let n = dot(&g, &g).sqrt();
        let u: Vec<f64> = g.iter().map(|v| v / n).collect();
        if in_cone(cone, &u, 0.0) {
            out.push(u);
        }
    }
    // Linear functions peak on the boundary, so add a dense sweep of every
    // face (a great-circle arc).
    let w = cone.w();
    for (i, wi) in w.iter().enumerate() {
        let (e1, e2) = plane_basis(wi);
        for k in 0..4000 {
            let a = std::f64::consts::TAU * k as f64 / 4000.0;
            let u: Vec<f64> = (0..3).map(|j| a.cos() * e1[j] + a.sin() * e2[j]).collect();
            if w.iter().enumerate().all(|(n, r)| n == i || dot(r, &u) >= 0.0) {
                out.push(u);
            }
        }
    }
    out
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Orthonormal basis of the plane orthogonal to the unit vector `n`.
fn plane_basis(n: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = cross(n, &helper);
    let l = dot(&e1, &e1).sqrt();
    let e1: Vec<f64> = e1.iter().map(|v| v / l).collect();
    let e2 = cross(n, &e1);
    (e1, e2)
}

/// Grid oracle for the gap: the smallest `s` on a `step` grid for which some
/// sampled unit `u ∈ C` moves `f(x) + s u` out of `f(x') - int C`, where
/// `delta = f(x') - f(x)`.
pub fn m_gap_oracle(cone: &ConeOrder, delta: &[f64], dirs: &[Vec<f64>], step: f64) -> f64 {
    if !in_interior(cone, delta) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for u in dirs {
        // Escape once some halfspace stops holding strictly.
        let mut s_u = f64::INFINITY;
        for w in cone.w() {
            let wu = dot(w, u);
            if wu > 0.0 {
                s_u = s_u.min(dot(w, delta) / wu);
            }
        }
        best = best.min(s_u);
    }
    (best / step).ceil() * step
}

/// Points of `box` on a regular grid with `n` points per axis.
pub fn box_grid(b: &Hyperrectangle, n: usize) -> Vec<Vec<f64>> {
    let m = b.dim();
    let total = n.pow(m as u32);
    (0..total)
        .map(|mut idx| {
            let mut y = vec![0.0; m];
            for j in 0..m {
                let k = idx % n;
                idx /= n;
                y[j] = b.lower()[j] + (b.upper()[j] - b.lower()[j]) * k as f64 / (n - 1) as f64;
            }
            y
        })
        .collect()
}

pub fn random_box(rng: &mut ChaCha8Rng, m: usize, center_spread: f64, max_width: f64) -> Hyperrectangle {
    let lo: Vec<f64> = (0..m).map(|_| rng.random_range(-center_spread..center_spread)).collect();
    let hi: Vec<f64> = lo.iter().map(|l| l + rng.random_range(0.0..max_width)).collect();
    Hyperrectangle::new(lo, hi)
}

/// Random box points including every vertex.
pub fn box_samples(b: &Hyperrectangle, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut pts = b.vertices();
    while pts.len() < count {
        pts.push(
            b.lower()
                .iter()
                .zip(b.upper())
                .map(|(l, u)| if u > l { rng.random_range(*l..=*u) } else { *l })
                .collect(),
        );
    }
    pts
}

// ---- counted suites (each returns the number of failed instances) ----

/// `‖p‖ ≤ ε/d_C` and `y + p ≼_C z` imply `y ≼_C z + ε u*`.
pub fn suite_accuracy_transfer(instances: usize, seed: u64) -> usize {
    let mut rng = rng(seed);
    let mut failures = 0;
    for _ in 0..instances {
        let cone = random_cone(&mut rng);
        let m = cone.dim();
        let eps = rng.random_range(0.01..1.0);
        let y = gaussian(&mut rng, m);
        let g = gaussian(&mut rng, m);
        let radius = eps / cone.d_c() * rng.random::<f64>();
        let p: Vec<f64> = g.iter().map(|v| v / dot(&g, &g).sqrt() * radius).collect();
        let c = loop {
            let c = gaussian(&mut rng, m);
            if in_cone(&cone, &c, 0.0) {
                break c;
            }
        };
        let t: f64 = rng.random();
        let z: Vec<f64> = (0..m).map(|j| y[j] + p[j] + t * c[j]).collect();
        let shifted: Vec<f64> = (0..m).map(|j| z[j] + eps * cone.u_star()[j] - y[j]).collect();
        if !in_cone(&cone, &shifted, 1e-9) {
            failures += 1;
        }
    }
    failures
}

/// `min_norm_qp(W, s·1) = s · min_norm_qp(W, 1)`.
pub fn suite_homogeneity(instances: usize, seed: u64) -> usize {
    let mut rng = rng(seed);
    let mut failures = 0;
    for _ in 0..instances {
        let cone = random_cone(&mut rng);
        let n = cone.n_halfspaces();
        let base = min_norm_qp(cone.w(), &vec![1.0; n]).unwrap();
        for s in [0.5, 2.0, 10.0] {
            let scaled = min_norm_qp(cone.w(), &vec![s; n]).unwrap();
            let err: f64 = scaled.z.iter().zip(&base.z).map(|(a, b)| (a - s * b).powi(2)).sum::<f64>().sqrt();
            if err > 1e-6 * s * base.norm {
                failures += 1;
                break;
            }
        }
    }
    failures
}

/// `discard_check` agrees with sampled pairs (vertices included) of the
/// condition `y ≼_C y' + ε u*` for all `y ∈ R(x)`, `y' ∈ R(x')`.
pub fn suite_vertex_equivalence(instances: usize, seed: u64) -> usize {
    let mut rng = rng(seed);
    let mut failures = 0;
    for _ in 0..instances {
        let cone = random_cone(&mut rng);
        let m = cone.dim();
        let eps = rng.random_range(0.0..0.5);
        let a = random_box(&mut rng, m, 1.0, 0.5);
        let b = random_box(&mut rng, m, 1.0, 0.5);
        let ya = box_samples(&a, 100, &mut rng);
        let yb = box_samples(&b, 100, &mut rng);
        let mut all = true;
        'outer: for y in &ya {
            for y2 in &yb {
                let d: Vec<f64> = (0..m).map(|j| y2[j] + eps * cone.u_star()[j] - y[j]).collect();
                if !in_cone(&cone, &d, 0.0) {
                    all = false;
                    break 'outer;
                }
            }
        }
        if discard_check(&a, &b, &cone, eps) != all {
            failures += 1;
        }
    }
    failures
}

/// `feasible_box_halfspaces` against a grid with step 1/100 of the box extent:
/// a feasible grid point forces "feasible", and "feasible" forces a grid point
/// within the discretization slack.
pub fn suite_feasibility_grid(instances: usize, seed: u64) -> usize {
    let mut rng = rng(seed);
    let mut failures = 0;
    for k in 0..instances {
        let m = if k % 2 == 0 { 2 } else { 3 };
        let bx = random_box(&mut rng, m, 1.0, 2.0);
        let rows = rng.random_range(1..=8);
        let a: Vec<Vec<f64>> = (0..rows).map(|_| gaussian(&mut rng, m)).collect();
        let anchor: Vec<f64> = bx.lower().iter().zip(bx.upper()).map(|(l, u)| rng.random_range(*l - 0.3..=*u + 0.3)).collect();
        let b: Vec<f64> = a.iter().map(|r| dot(r, &anchor) - rng.random_range(-0.3..0.5)).collect();
        let solver = feasible_box_halfspaces(&FeasibilityProblem::new(bx.clone(), a.clone(), b.clone())).unwrap();
        let n = 101;
        let half_diag: f64 = bx
            .lower()
            .iter()
            .zip(bx.upper())
            .map(|(l, u)| ((u - l) / (n - 1) as f64).powi(2))
            .sum::<f64>()
            .sqrt()
            / 2.0;
        let grid = box_grid(&bx, n);
        let strict = grid.iter().any(|y| a.iter().zip(&b).all(|(r, bi)| dot(r, y) >= *bi));
        let relaxed = grid
            .iter()
            .any(|y| a.iter().zip(&b).all(|(r, bi)| dot(r, y) >= bi - dot(r, r).sqrt() * half_diag - 1e-9));
        if (strict && !solver) || (solver && !relaxed) {
            failures += 1;
        }
    }
    failures
}

/// `min_norm_qp` against a grid over `[-3, 3]^2` with step 1e-2.
pub fn suite_min_norm_grid(instances: usize, seed: u64) -> usize {
    let mut rng = rng(seed);
    let mut failures = 0;
    let step = 1e-2;
    let n = (6.0 / step) as usize + 1;
    let pts: Vec<[f64; 2]> = (0..n * n)
        .map(|k| [-3.0 + step * (k / n) as f64, -3.0 + step * (k % n) as f64])
        .collect();
    let mut done = 0;
    while done < instances {
        let cone = ConeOrder::cone_2d(rng.random_range(40.0..170.0)).unwrap();
        let mut w = cone.w().to_vec();
        if rng.random_bool(0.5) {
            // An extra redundant or cutting row.
            let t: f64 = rng.random_range(0.0..1.0);
            let r = [w[0][0] * t + w[1][0] * (1.0 - t), w[0][1] * t + w[1][1] * (1.0 - t)];
            let nr = (r[0] * r[0] + r[1] * r[1]).sqrt();
            w.push(vec![r[0] / nr, r[1] / nr]);
        }
        let c: Vec<f64> = w.iter().map(|_| rng.random_range(-0.5..1.0)).collect();
        let Ok(qp) = min_norm_qp(&w, &c) else {
            failures += 1;
            done += 1;
            continue;
        };
        if qp.norm > 2.5 {
            continue;
        }
        done += 1;
        let grid_best = pts
            .iter()
            .filter(|z| w.iter().zip(&c).all(|(r, ci)| r[0] * z[0] + r[1] * z[1] >= *ci))
            .map(|z| (z[0] * z[0] + z[1] * z[1]).sqrt())
            .fold(f64::INFINITY, f64::min);
        let feasible = w.iter().zip(&c).all(|(r, ci)| dot(r, &qp.z) >= ci - 1e-8);
        if !feasible || grid_best < qp.norm - 1e-9 || grid_best - qp.norm > 2.0 * step {
            failures += 1;
        }
    }
    failures
}

/// Fast `m_gap` against the grid oracle.
pub fn suite_m_gap_grid(instances: usize, seed: u64) -> usize {
    let mut r = rng(seed);
    let mut failures = 0;
    for _ in 0..instances {
        let cone = random_cone(&mut r);
        let dirs = cone_directions(&cone, 10_000, &mut r);
        let m = cone.dim();
        // Mostly deltas inside the cone, where the gap is positive.
        let delta: Vec<f64> = if r.random_bool(0.8) {
            loop {
                let d = gaussian(&mut r, m);
                if in_interior(&cone, &d) {
                    break d;
                }
            }
        } else {
            gaussian(&mut r, m)
        };
        let fast = cone.m_gap(&delta);
        let oracle = m_gap_oracle(&cone, &delta, &dirs, 1e-3);
        if fast > oracle + 1e-9 || oracle - fast > 2e-3 {
            failures += 1;
        }
    }
    failures
}

/// Monte Carlo estimate of the cone hypervolume with its standard error.
///
/// Samples the bounding box of `[W r, W y_i]` in image space and counts points
/// below some image.
pub fn hv_monte_carlo(front: &[Vec<f64>], cone: &ConeOrder, reference: &[f64], samples: usize, seed: u64) -> (f64, f64) {
    let mut r = rng(seed);
    let lo = cone.apply(reference);
    let images: Vec<Vec<f64>> = front.iter().map(|y| cone.apply(y)).collect();
    let hi: Vec<f64> = (0..lo.len())
        .map(|k| images.iter().map(|z| z[k]).fold(lo[k], f64::max))
        .collect();
    let box_volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    if box_volume == 0.0 {
        return (0.0, 0.0);
    }
    let mut hits = 0usize;
    let mut p = vec![0.0; lo.len()];
    for _ in 0..samples {
        for k in 0..lo.len() {
            p[k] = r.random_range(lo[k]..=hi[k]);
        }
        if images.iter().any(|z| z.iter().zip(&p).all(|(a, b)| b <= a)) {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    let se = (frac * (1.0 - frac) / samples as f64).sqrt() * box_volume;
    (frac * box_volume, se)
}

/// Smallest `||u||` over `u ∈ C` with `W (y + u - y_star) ≥ 0`, by scanning
/// directions and taking the shortest feasible step along each.
pub fn cover_distance_oracle(cone: &ConeOrder, y_star: &[f64], y: &[f64], dirs: &[Vec<f64>]) -> f64 {
    let need: Vec<f64> = cone
        .w()
        .iter()
        .map(|w| w.iter().zip(y_star.iter().zip(y)).map(|(a, (s, v))| a * (s - v)).sum::<f64>())
        .collect();
    if need.iter().all(|c| *c <= 0.0) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    'dirs: for u in dirs {
        let mut s: f64 = 0.0;
        for (w, c) in cone.w().iter().zip(&need) {
            let a = dot(w, u);
            if *c > 0.0 {
                if a <= 0.0 {
                    continue 'dirs;
                }
                s = s.max(c / a);
            }
        }
        best = best.min(s);
    }
    best
}
