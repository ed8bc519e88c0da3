//! The slow-migration limit on the rescaled clock: exact piecewise-constant
//! profiles and convergence measurement of rescaled ODE trajectories.

mod convergence;
mod profile;

pub use convergence::{verify_convergence, ConvergenceReport, ConvergenceRow, SweepOptions};
pub use profile::{build_limit_profile, LimitProfile};

use crate::model::ModelError;
use crate::ode::OdeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("assumption violation: {0}")]
    AssumptionViolation(String),
    #[error("expected crossing not found: {0}")]
    UnresolvedEvent(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ode(#[from] OdeError),
}
