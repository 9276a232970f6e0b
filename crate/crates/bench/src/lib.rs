//! Instance generators shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vogp::gp::{KernelSpec, SurrogateModel};
use vogp::vogp::AlgState;
use vogp::{ConeOrder, Hyperrectangle};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random()).collect()).collect()
}

/// Random box with center in `[-1, 1]^m` and side lengths up to `max_width`.
pub fn random_box(rng: &mut ChaCha8Rng, m: usize, max_width: f64) -> Hyperrectangle {
    let center: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let half: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..max_width / 2.0)).collect();
    Hyperrectangle::centered(&center, &half)
}

/// Mutually nondominated points on the unit quarter circle (2D) or sphere
/// octant (3D).
pub fn spherical_front(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / norm).collect()
        })
        .collect()
}

/// Two conflicting smooth objectives on `[0, 1]^2`.
pub fn toy_objective(x: &[f64]) -> Vec<f64> {
    vec![(3.0 * x[0]).sin() * 0.5 + 0.3 * x[1], (2.0 * x[1]).cos() * 0.5 - 0.4 * x[0]]
}

/// Model conditioned on `n` noiseless observations of [`toy_objective`].
pub fn observed_model(n: usize, seed: u64) -> SurrogateModel {
    let mut r = rng(seed);
    let mut model = SurrogateModel::new(KernelSpec::isotropic(2, 2, 0.3), 0.01).expect("valid kernel");
    for x in uniform_points(&mut r, n, 2) {
        model.condition(&x, &toy_objective(&x)).expect("conditioning succeeds");
    }
    model
}

/// Fresh algorithm state over `n` random designs, plus the model and cone it
/// runs with.
pub fn vogp_instance(n: usize, observations: usize, seed: u64) -> (AlgState, SurrogateModel, ConeOrder) {
    let mut r = rng(seed);
    let designs = uniform_points(&mut r, n, 2);
    let cone = ConeOrder::builtin("right", 2).expect("builtin cone");
    (AlgState::new(designs, 2), observed_model(observations, seed + 1), cone)
}
