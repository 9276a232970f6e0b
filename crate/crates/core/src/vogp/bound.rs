//! Worst-case number of evaluations after which the algorithm must stop.

use super::{VogpError, VogpParams};
use crate::cone::ConeOrder;
use crate::gp::BetaSchedule;

const SEARCH_CAP: usize = 10_000_000;

/// Smallest `t` with `sqrt(8 β_t σ² η M γ_t / t) < ε / d_C`, where
/// `η = σ⁻² / ln(1 + σ⁻²)` and `gamma(t)` estimates the maximum information gain.
pub fn theoretical_sample_bound<G>(
    params: &VogpParams,
    cone: &ConeOrder,
    schedule: &BetaSchedule,
    mut gamma: G,
) -> Result<usize, VogpError>
where
    G: FnMut(usize) -> f64,
{
    params.validate()?;
    if params.epsilon <= 0.0 {
        return Err(VogpError::NotFound(SEARCH_CAP));
    }
    let s2 = params.noise_std * params.noise_std;
    let eta = (1.0 / s2) / (1.0 + 1.0 / s2).ln();
    let m = cone.dim() as f64;
    let target = params.epsilon / cone.d_c();
    for t in 1..=SEARCH_CAP {
        let lhs = (8.0 * schedule.value(t) * s2 * eta * m * gamma(t) / t as f64).sqrt();
        if lhs < target {
            return Ok(t);
        }
    }
    Err(VogpError::NotFound(SEARCH_CAP))
}
