//! Naive elimination: sample every design a fixed number of times and keep
//! the Pareto set of the empirical means.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::dataset::Dataset;
use super::HarnessError;
use crate::cone::ConeOrder;
use crate::metrics;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeOutcome {
    pub predicted: Vec<usize>,
    pub means: Vec<Vec<f64>>,
    pub total_queries: usize,
}

pub fn naive_elimination(
    dataset: &Dataset,
    cone: &ConeOrder,
    budget: usize,
    noise_std: f64,
    seed: u64,
) -> Result<NeOutcome, HarnessError> {
    if budget == 0 {
        return Err(HarnessError::InvalidConfig("per-design budget must be at least 1".into()));
    }
    if dataset.objective_dim() != cone.dim() {
        return Err(HarnessError::DimensionMismatch { expected: cone.dim(), got: dataset.objective_dim() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<Vec<f64>> = dataset
        .objectives
        .iter()
        .map(|f| {
            let mut acc = vec![0.0; f.len()];
            for _ in 0..budget {
                for (a, v) in acc.iter_mut().zip(f) {
                    *a += v + noise_std * rng.sample::<f64, _>(StandardNormal);
                }
            }
            acc.iter().map(|a| a / budget as f64).collect()
        })
        .collect();
    let predicted = metrics::true_pareto_front(&means, cone)?;
    Ok(NeOutcome { predicted, means, total_queries: budget * dataset.len() })
}
