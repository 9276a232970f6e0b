//! Pareto set identification under polyhedral ordering cones.
//!
//! [`vogp::run`] drives the discrete algorithm over a finite design set with a
//! [`gp::SurrogateModel`]; [`adadisc::run_continuous`] handles `[0, 1]^D`
//! through adaptive cell refinement. [`harness`] wires both to datasets,
//! configs and result files.

pub mod adadisc;
pub mod cone;
pub mod convex;
pub mod gp;
pub mod harness;
pub mod metrics;
pub mod vogp;

pub use adadisc::{AdadiscError, ContinuousOptions, ContinuousOutcome, RkhsWidthPolicy};
pub use cone::{ConeError, ConeOrder};
pub use convex::{ConvexError, FeasibilityProblem, Hyperrectangle};
pub use gp::{BetaSchedule, GpError, KernelSpec, SurrogateModel};
pub use harness::{HarnessError, RunConfig};
pub use metrics::{FrontEvaluation, MetricsError};
pub use vogp::{VogpError, VogpOutcome, VogpParams, WidthPolicy};

/// Any error raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Vogp(#[from] VogpError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Adadisc(#[from] AdadiscError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}
