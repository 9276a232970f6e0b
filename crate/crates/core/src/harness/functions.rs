//! Synthetic benchmark objectives on `[0, 1]^D`, signed so that larger is better.

use std::f64::consts::PI;

use super::HarnessError;

/// Branin on `[-5, 10] × [0, 15]`, reached through `x1 = 15 u - 5`, `x2 = 15 v`.
/// Global minimum 0.397887.
pub fn branin(u: f64, v: f64) -> f64 {
    let x1 = 15.0 * u - 5.0;
    let x2 = 15.0 * v;
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    (x2 - b * x1 * x1 + c * x1 - 6.0).powi(2) + 10.0 * (1.0 - t) * x1.cos() + 10.0
}

/// Currin exponential function on `[0, 1]^2`.
pub fn currin(x1: f64, x2: f64) -> f64 {
    // exp(-1 / (2 x2)) -> 0 as x2 -> 0
    let damp = if x2 > 0.0 { 1.0 - (-1.0 / (2.0 * x2)).exp() } else { 1.0 };
    let num = 2300.0 * x1.powi(3) + 1900.0 * x1 * x1 + 2092.0 * x1 + 60.0;
    let den = 100.0 * x1.powi(3) + 500.0 * x1 * x1 + 4.0 * x1 + 20.0;
    damp * num / den
}

/// ZDT3 objectives `(f1, f2)` for any `D >= 2`.
pub fn zdt3(x: &[f64]) -> [f64; 2] {
    let f1 = x[0];
    let tail = &x[1..];
    let g = 1.0 + 9.0 * tail.iter().sum::<f64>() / tail.len() as f64;
    let r = f1 / g;
    let h = 1.0 - r.sqrt() - r * (10.0 * PI * f1).sin();
    [f1, g * h]
}

/// Names accepted by [`builtin_objective`].
pub const BUILTIN_FUNCTIONS: &[&str] = &["BC", "BCC", "ZDT3"];

/// Input dimension of a builtin function.
pub fn builtin_dim(name: &str) -> Result<usize, HarnessError> {
    match name {
        "BC" | "BCC" | "ZDT3" => Ok(2),
        _ => Err(HarnessError::UnknownName(name.to_string())),
    }
}

/// Evaluates a builtin, negating minimization objectives.
pub fn builtin_objective(name: &str, x: &[f64]) -> Result<Vec<f64>, HarnessError> {
    let d = builtin_dim(name)?;
    if x.len() != d {
        return Err(HarnessError::DimensionMismatch { expected: d, got: x.len() });
    }
    if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(HarnessError::OutOfDomain(x.to_vec()));
    }
    Ok(match name {
        "BC" | "BCC" => vec![-branin(x[0], x[1]), -currin(x[0], x[1])],
        _ => zdt3(x).iter().map(|v| -v).collect(),
    })
}
