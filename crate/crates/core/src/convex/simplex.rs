//! Phase-one dense simplex for `{ s : 0 <= s <= width, A s >= d }`.

use super::{dot, ConvexError};

const PIVOT_TOL: f64 = 1e-12;
const MAX_PIVOTS: usize = 50_000;

/// Returns whether `lower <= y <= upper, A y >= rhs` has a solution.
///
/// Works in shifted variables `s = y - lower`. Columns are laid out as
/// `[s (m) | box slacks (m) | row slacks/surpluses (k) | artificials]`, and the
/// phase-one objective is the sum of artificials.
pub(super) fn phase_one_feasible(
    lower: &[f64],
    upper: &[f64],
    a: &[Vec<f64>],
    rhs: &[f64],
) -> Result<bool, ConvexError> {
    let m = lower.len();
    let k = a.len();
    let d: Vec<f64> = a.iter().zip(rhs).map(|(row, r)| r - dot(row, lower)).collect();
    let n_art = d.iter().filter(|&&v| v > 0.0).count();
    let n_cols = 2 * m + k + n_art;
    let width = n_cols + 1;
    let n_rows = m + k;

    let mut tab = vec![0.0; n_rows * width];
    let mut basis = vec![0usize; n_rows];
    let mut is_art = vec![false; n_cols];

    // s_j + t_j = upper_j - lower_j
    for j in 0..m {
        let row = &mut tab[j * width..(j + 1) * width];
        row[j] = 1.0;
        row[m + j] = 1.0;
        row[n_cols] = upper[j] - lower[j];
        basis[j] = m + j;
    }
    let mut next_art = 2 * m + k;
    for (i, (arow, &di)) in a.iter().zip(&d).enumerate() {
        let r = m + i;
        let row = &mut tab[r * width..(r + 1) * width];
        if di > 0.0 {
            // a s - e + art = d
            row[..m].copy_from_slice(arow);
            row[2 * m + i] = -1.0;
            row[next_art] = 1.0;
            row[n_cols] = di;
            basis[r] = next_art;
            is_art[next_art] = true;
            next_art += 1;
        } else {
            // -a s + e = -d
            for j in 0..m {
                row[j] = -arow[j];
            }
            row[2 * m + i] = 1.0;
            row[n_cols] = -di;
            basis[r] = 2 * m + i;
        }
    }
    if n_art == 0 {
        return Ok(true);
    }

    // Reduced costs of the phase-one objective (minimise the artificial sum).
    let mut cost = vec![0.0; width];
    for (j, c) in cost.iter_mut().enumerate().take(n_cols) {
        if is_art[j] {
            *c = 1.0;
        }
    }
    for r in 0..n_rows {
        if is_art[basis[r]] {
            for j in 0..width {
                cost[j] -= tab[r * width + j];
            }
        }
    }
    // cost[n_cols] now holds minus the current objective value.
    let scale = 1.0 + d.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    for _ in 0..MAX_PIVOTS {
        // Bland: lowest-index improving column.
        let Some(enter) = (0..n_cols).find(|&j| cost[j] < -PIVOT_TOL * scale) else {
            let value = -cost[n_cols];
            return Ok(value <= 1e-11 * scale);
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..n_rows {
            let coef = tab[r * width + enter];
            if coef > PIVOT_TOL {
                let ratio = tab[r * width + n_cols] / coef;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-15 || (ratio <= lratio + 1e-15 && basis[r] < basis[lr]) {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
        }
        // Phase one is bounded below by zero, so some row always limits the step.
        let Some((pr, _)) = leave else {
            return Err(ConvexError::NotConverged(MAX_PIVOTS));
        };
        pivot(&mut tab, width, n_rows, pr, enter, &mut cost);
        basis[pr] = enter;
    }
    Err(ConvexError::NotConverged(MAX_PIVOTS))
}

fn pivot(tab: &mut [f64], width: usize, n_rows: usize, pr: usize, pc: usize, cost: &mut [f64]) {
    let inv = 1.0 / tab[pr * width + pc];
    for j in 0..width {
        tab[pr * width + j] *= inv;
    }
    tab[pr * width + pc] = 1.0;
    let (before, rest) = tab.split_at_mut(pr * width);
    let (prow, after) = rest.split_at_mut(width);
    for row in before.chunks_mut(width).chain(after.chunks_mut(width)) {
        let f = row[pc];
        if f != 0.0 {
            for j in 0..width {
                row[j] -= f * prow[j];
            }
            row[pc] = 0.0;
        }
    }
    let f = cost[pc];
    if f != 0.0 {
        for j in 0..width {
            cost[j] -= f * prow[j];
        }
        cost[pc] = 0.0;
    }
    debug_assert_eq!(tab.len(), n_rows * width);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivially_feasible_without_artificials() {
        let ok = phase_one_feasible(&[0.0, 0.0], &[1.0, 1.0], &[vec![1.0, 1.0]], &[-1.0]).unwrap();
        assert!(ok);
    }

    #[test]
    fn thin_sliver() {
        let a = vec![vec![1.0, -1.0], vec![-1.0, 1.0], vec![1.0, 1.0], vec![-1.0, -1.0]];
        let ok = phase_one_feasible(&[0.0, 0.0], &[1.0, 1.0], &a, &[-0.01, -0.01, 1.5, -1.7]).unwrap();
        assert!(ok);
        let bad = phase_one_feasible(&[0.0, 0.0], &[1.0, 1.0], &a, &[-0.01, -0.01, 1.5, -1.4]).unwrap();
        assert!(!bad);
    }

    #[test]
    fn degenerate_duplicate_rows_terminate() {
        let a = vec![vec![1.0, 1.0]; 6];
        let ok = phase_one_feasible(&[0.0, 0.0], &[1.0, 1.0], &a, &[2.0; 6]).unwrap();
        assert!(ok);
    }
}
