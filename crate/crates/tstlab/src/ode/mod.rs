//! Deterministic dynamics: adaptive integration of the finite-trait system
//! with either birth-weighted or plain migration, level-crossing detection,
//! and the two-scale simulator that adds Poissonian mutant insertions.

mod dopri;
mod system;
mod trajectory;
mod twoscale;

pub use dopri::{integrate_adaptive, StepStats, StepperOptions};
pub use system::{MigrationMode, OdeSystemSpec};
pub use trajectory::{detect_crossings, CrossingEvent, CrossingKind, Trajectory};
pub use twoscale::{
    simulate_two_scale, MutationEvent, TwoScaleOptions, TwoScaleRun, TwoScaleSegment,
};

pub(crate) use system::SystemParams;

use crate::model::{compute_fitness, ModelError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("density blow-up at t = {t:.6}: {value:.3e} exceeds cap {cap:.3e}")]
    BlowUp { t: f64, value: f64, cap: f64 },
    #[error("step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Extra integration knobs beyond the single `tol`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IntegrateOptions {
    /// Cap on the step size. Defaults to `0.1 / max |f|` over consecutive
    /// ordered pairs, the fastest sweep rate in the system.
    pub max_step: Option<f64>,
    /// Absolute error floor; defaults to near-pure relative control.
    pub atol: Option<f64>,
}

/// Integrates the system to `t_end` with local error tolerance `tol`,
/// recording every accepted step.
pub fn integrate(spec: &OdeSystemSpec, t_end: f64, tol: f64) -> Result<Trajectory, OdeError> {
    integrate_with(spec, t_end, tol, &IntegrateOptions::default())
}

pub fn integrate_with(
    spec: &OdeSystemSpec,
    t_end: f64,
    tol: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory, OdeError> {
    if !(t_end > 0.0) {
        return Err(OdeError::InvalidArgument("t_end must be > 0".into()));
    }
    if !(tol > 0.0) {
        return Err(OdeError::InvalidArgument("tol must be > 0".into()));
    }
    let model = &spec.model;
    let n = model.traits.len();
    if spec.initial_state.len() != n {
        return Err(OdeError::InvalidArgument(format!(
            "initial_state has {} entries, model has {n} traits",
            spec.initial_state.len()
        )));
    }
    if spec.initial_state.iter().any(|v| *v < 0.0) {
        return Err(OdeError::InvalidArgument(
            "initial densities must be nonnegative".into(),
        ));
    }
    if !spec.initial_state.iter().any(|v| *v > 0.0) {
        return Err(OdeError::InvalidArgument(
            "at least one initial density must be positive".into(),
        ));
    }

    let fit = compute_fitness(model)?;
    let seq = fit.sequence();
    let params = SystemParams::build(model, &model.traits, &seq)?;

    // initial state arrives indexed by trait id; integrate in rank order
    let y0: Vec<f64> = seq
        .ordered_ids()
        .iter()
        .map(|id| spec.initial_state[*id as usize])
        .collect();

    let stepper = StepperOptions {
        rtol: tol,
        atol: opts.atol.unwrap_or(1e-60),
        max_step: opts
            .max_step
            .unwrap_or_else(|| default_max_step(fit.max_consecutive_fitness())),
        mass_cap: model.options.mass_cap,
    };

    let mut traj = Trajectory::new(seq.ordered_ids().to_vec());
    traj.push(0.0, &y0);
    let mode = spec.migration_mode;
    let eps = model.scales.epsilon;
    let (_, _stats) = integrate_adaptive(
        |_t, y, dy| params.rhs(mode, eps, y, dy),
        0.0,
        &y0,
        t_end,
        &stepper,
        |t, y| traj.push(t, y),
    )?;
    Ok(traj)
}

pub(crate) fn default_max_step(max_fitness: f64) -> f64 {
    if max_fitness > 0.0 {
        (0.1 / max_fitness).clamp(1e-3, 1.0)
    } else {
        0.1
    }
}
