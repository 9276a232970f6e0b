//! Design/objective tables, CSV ingestion and synthetic problems.

use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::functions::{branin, currin};
use super::HarnessError;
use crate::gp::KernelSpec;

/// A finite design set with normalized designs and scaled objectives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub designs: Vec<Vec<f64>>,
    pub objectives: Vec<Vec<f64>>,
    /// Raw `(min, max)` per design column.
    pub design_ranges: Vec<(f64, f64)>,
    /// Raw `(min, max)` per objective column.
    pub objective_ranges: Vec<(f64, f64)>,
}

/// Min-max scales a column in place. A constant column becomes zeros.
fn scale_column(rows: &mut [Vec<f64>], j: usize, what: &str) -> (f64, f64) {
    let lo = rows.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        for r in rows.iter_mut() {
            r[j] = (r[j] - lo) / (hi - lo);
        }
    } else {
        log::warn!("{what} column {j} is constant; normalized to zeros");
        for r in rows.iter_mut() {
            r[j] = 0.0;
        }
    }
    (lo, hi)
}

fn check_table(rows: &[Vec<f64>], width: usize) -> Result<(), HarnessError> {
    for (i, r) in rows.iter().enumerate() {
        if r.len() != width {
            return Err(HarnessError::DimensionMismatch { expected: width, got: r.len() });
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(HarnessError::NonNumericCell { row: i, col: j, value: r[j].to_string() });
        }
    }
    Ok(())
}

impl Dataset {
    /// Min-max normalizes raw designs and objectives column by column.
    pub fn from_raw(mut designs: Vec<Vec<f64>>, mut objectives: Vec<Vec<f64>>) -> Result<Self, HarnessError> {
        if designs.len() != objectives.len() {
            return Err(HarnessError::DimensionMismatch { expected: designs.len(), got: objectives.len() });
        }
        if designs.len() < 2 {
            return Err(HarnessError::TooFewRows(designs.len()));
        }
        let d = designs[0].len();
        let m = objectives[0].len();
        check_table(&designs, d)?;
        check_table(&objectives, m)?;
        let design_ranges = (0..d).map(|j| scale_column(&mut designs, j, "design")).collect();
        let objective_ranges = (0..m).map(|j| scale_column(&mut objectives, j, "objective")).collect();
        Ok(Self { designs, objectives, design_ranges, objective_ranges })
    }

    pub fn len(&self) -> usize {
        self.designs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.designs.is_empty()
    }

    pub fn design_dim(&self) -> usize {
        self.design_ranges.len()
    }

    pub fn objective_dim(&self) -> usize {
        self.objective_ranges.len()
    }

    pub fn denormalize_design(&self, x: &[f64]) -> Vec<f64> {
        denormalize(x, &self.design_ranges)
    }

    pub fn denormalize_objective(&self, y: &[f64]) -> Vec<f64> {
        denormalize(y, &self.objective_ranges)
    }

    /// Column means of the objectives.
    pub fn objective_means(&self) -> Vec<f64> {
        column_means(&self.objectives)
    }
}

fn denormalize(x: &[f64], ranges: &[(f64, f64)]) -> Vec<f64> {
    x.iter().zip(ranges).map(|(v, (lo, hi))| lo + v * (hi - lo)).collect()
}

pub(crate) fn column_means(rows: &[Vec<f64>]) -> Vec<f64> {
    let m = rows.first().map_or(0, Vec::len);
    (0..m).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64).collect()
}

/// Reads a CSV with header `d0,..,d{D-1},o0,..,o{M-1}`.
pub fn load_dataset_csv(path: &Path) -> Result<Dataset, HarnessError> {
    let file = std::fs::File::open(path)?;
    parse_dataset_csv(file)
}

/// Parses dataset CSV text. Cell coordinates in errors are zero-based data
/// row and column.
pub fn parse_dataset_csv<R: std::io::Read>(reader: R) -> Result<Dataset, HarnessError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| HarnessError::MalformedHeader(e.to_string()))?.clone();
    let names: Vec<&str> = header.iter().collect();
    let d = names.iter().take_while(|n| n.starts_with('d')).count();
    let m = names.len() - d;
    let expected: Vec<String> = (0..d).map(|j| format!("d{j}")).chain((0..m).map(|j| format!("o{j}"))).collect();
    if d == 0 || m == 0 || names != expected {
        return Err(HarnessError::MalformedHeader(names.join(",")));
    }
    let mut designs = Vec::new();
    let mut objectives = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| HarnessError::Csv(e.to_string()))?;
        if rec.len() != d + m {
            return Err(HarnessError::DimensionMismatch { expected: d + m, got: rec.len() });
        }
        let mut vals = Vec::with_capacity(d + m);
        for (col, cell) in rec.iter().enumerate() {
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => vals.push(v),
                _ => return Err(HarnessError::NonNumericCell { row, col, value: cell.to_string() }),
            }
        }
        objectives.push(vals.split_off(d));
        designs.push(vals);
    }
    if designs.len() < 2 {
        return Err(HarnessError::TooFewRows(designs.len()));
    }
    Dataset::from_raw(designs, objectives)
}

/// Branin-Currin on `n` uniform designs in `[0, 1]^2`, objectives negated
/// and min-max scaled.
pub fn branin_currin_dataset(n: usize, seed: u64) -> Result<Dataset, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let designs: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
    let objectives: Vec<Vec<f64>> = designs.iter().map(|x| vec![-branin(x[0], x[1]), -currin(x[0], x[1])]).collect();
    scaled_objectives(designs, objectives)
}

/// Keeps designs as given (already in the unit cube) and min-max scales objectives.
pub fn scaled_objectives(designs: Vec<Vec<f64>>, mut objectives: Vec<Vec<f64>>) -> Result<Dataset, HarnessError> {
    if designs.len() < 2 {
        return Err(HarnessError::TooFewRows(designs.len()));
    }
    let d = designs[0].len();
    let m = objectives[0].len();
    check_table(&designs, d)?;
    check_table(&objectives, m)?;
    let objective_ranges = (0..m).map(|j| scale_column(&mut objectives, j, "objective")).collect();
    Ok(Dataset { designs, objectives, design_ranges: vec![(0.0, 1.0); d], objective_ranges })
}

/// Draws `n` uniform designs and one joint sample of the GP prior with
/// `kernel` at them. Objectives are left on the prior's scale.
pub fn gp_sample_dataset(n: usize, kernel: &KernelSpec, seed: u64) -> Result<Dataset, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = kernel.input_dim();
    let m = kernel.output_dim();
    let designs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
    let dim = n * m;
    let mut gram = DMatrix::from_fn(dim, dim, |a, b| {
        kernel.design(&designs[a / m], &designs[b / m]) * kernel.output_kernel[a % m][b % m]
    });
    let mut jitter = 1e-10;
    let chol = loop {
        if let Some(c) = gram.clone().cholesky() {
            break c;
        }
        if jitter > 1e-4 {
            return Err(HarnessError::Gp(crate::gp::GpError::FactorizationFailure));
        }
        for i in 0..dim {
            gram[(i, i)] += jitter;
        }
        jitter *= 10.0;
    };
    let z = nalgebra::DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let f = chol.l() * z;
    let objectives = (0..n).map(|i| (0..m).map(|p| f[i * m + p]).collect()).collect();
    Ok(Dataset {
        designs,
        objectives,
        design_ranges: vec![(0.0, 1.0); d],
        objective_ranges: vec![(0.0, 1.0); m],
    })
}
